#include "n400/table.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include "n400/util.hpp"

namespace n400 {

namespace {

// Column kinds are fixed by name: the five grouping/key columns are
// categorical, everything else (amplitude, predictors) is numeric.
bool is_categorical_name(const std::string& name) {
    return name == "subject" || name == "frame_id" || name == "condition" ||
           name == "electrode" || name == "roi";
}

} // namespace

bool AnalysisTable::has_column(const std::string& name) const {
    for (const auto& c : columns_)
        if (c.name == name) return true;
    return false;
}

const AnalysisTable::Column& AnalysisTable::column(const std::string& name) const {
    for (const auto& c : columns_)
        if (c.name == name) return c;
    throw InputError("table has no column '" + name + "'");
}

const std::vector<double>& AnalysisTable::numeric(const std::string& name) const {
    const Column& c = column(name);
    if (c.kind != ColumnKind::Numeric)
        throw InputError("column '" + name + "' is not numeric");
    return c.values;
}

const std::vector<std::string>& AnalysisTable::categorical(const std::string& name) const {
    const Column& c = column(name);
    if (c.kind != ColumnKind::Categorical)
        throw InputError("column '" + name + "' is not categorical");
    return c.labels;
}

void AnalysisTable::check_size(std::size_t n, const std::string& name) {
    if (empty_) {
        n_rows_ = n;
        empty_ = false;
    } else if (n != n_rows_) {
        throw InputError("column '" + name + "' has " + std::to_string(n) +
                         " rows, table has " + std::to_string(n_rows_));
    }
    if (has_column(name)) throw InputError("duplicate column '" + name + "'");
}

void AnalysisTable::add_numeric(const std::string& name, std::vector<double> values) {
    check_size(values.size(), name);
    columns_.push_back({name, ColumnKind::Numeric, std::move(values), {}});
}

void AnalysisTable::add_categorical(const std::string& name,
                                    std::vector<std::string> labels) {
    check_size(labels.size(), name);
    columns_.push_back({name, ColumnKind::Categorical, {}, std::move(labels)});
}

std::vector<std::string> AnalysisTable::levels(const std::string& name) const {
    const auto& labs = categorical(name);
    std::set<std::string> distinct(labs.begin(), labs.end());
    return {distinct.begin(), distinct.end()};
}

AnalysisTable AnalysisTable::subset(const std::vector<std::size_t>& rows) const {
    AnalysisTable out;
    for (const auto& c : columns_) {
        if (c.kind == ColumnKind::Numeric) {
            std::vector<double> v;
            v.reserve(rows.size());
            for (std::size_t r : rows) v.push_back(c.values.at(r));
            out.add_numeric(c.name, std::move(v));
        } else {
            std::vector<std::string> v;
            v.reserve(rows.size());
            for (std::size_t r : rows) v.push_back(c.labels.at(r));
            out.add_categorical(c.name, std::move(v));
        }
    }
    return out;
}

bool AnalysisTable::operator==(const AnalysisTable& other) const {
    if (n_rows_ != other.n_rows_ || columns_.size() != other.columns_.size())
        return false;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        const Column& a = columns_[i];
        const Column& b = other.columns_[i];
        if (a.name != b.name || a.kind != b.kind) return false;
        if (a.values != b.values || a.labels != b.labels) return false;
    }
    return true;
}

void AnalysisTable::write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        os << (i ? "," : "") << columns_[i].name;
    os << "\n";
    for (std::size_t r = 0; r < n_rows_; ++r) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) os << ",";
            const Column& c = columns_[i];
            if (c.kind == ColumnKind::Numeric)
                os << format_g9(c.values[r]);
            else
                os << c.labels[r];
        }
        os << "\n";
    }
}

AnalysisTable AnalysisTable::read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InputError("table csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split(line, ',');
    const std::size_t k = header.size();

    std::vector<std::vector<std::string>> cells(k);
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split(line, ',');
        if (fields.size() != k)
            throw InputError("table csv line " + std::to_string(lineno) + ": " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(k));
        for (std::size_t i = 0; i < k; ++i) cells[i].push_back(std::move(fields[i]));
    }

    AnalysisTable out;
    for (std::size_t i = 0; i < k; ++i) {
        const std::string& name = header[i];
        if (is_categorical_name(name)) {
            out.add_categorical(name, std::move(cells[i]));
        } else {
            std::vector<double> v;
            v.reserve(cells[i].size());
            for (std::size_t r = 0; r < cells[i].size(); ++r)
                v.push_back(parse_double(cells[i][r], "table csv column " + name));
            out.add_numeric(name, std::move(v));
        }
    }
    return out;
}

} // namespace n400
