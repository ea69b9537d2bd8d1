#ifndef N400_UTIL_HPP
#define N400_UTIL_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace n400 {

// Error classes map to CLI exit codes: input 2, numeric 3, config 4.
enum class ErrorClass { Input = 2, Numeric = 3, Config = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& msg)
        : std::runtime_error(msg), cls_(cls) {}
    ErrorClass error_class() const { return cls_; }

private:
    ErrorClass cls_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(ErrorClass::Input, msg) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(ErrorClass::Numeric, msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

// Fixed 9-significant-digit formatting; the byte-stable table convention.
std::string format_g9(double x);

double parse_double(std::string_view s, const std::string& context);
long parse_long(std::string_view s, const std::string& context);

std::vector<std::string> split(std::string_view line, char sep);
std::string trim(std::string_view s);
std::string lower(std::string_view s);

// FNV-1a, used for data fingerprints and run manifests.
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string version_string();

} // namespace n400

#endif
