#ifndef N400_TABLE_HPP
#define N400_TABLE_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace n400 {

// Column-oriented long-format table: outcomes, predictors and grouping
// factors, one row per measurement. Input to every model fit.
class AnalysisTable {
public:
    enum class ColumnKind { Numeric, Categorical };

    struct Column {
        std::string name;
        ColumnKind kind = ColumnKind::Numeric;
        std::vector<double> values;      // Numeric
        std::vector<std::string> labels; // Categorical
    };

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return columns_.size(); }

    bool has_column(const std::string& name) const;
    const Column& column(const std::string& name) const; // throws InputError
    const std::vector<Column>& columns() const { return columns_; }

    const std::vector<double>& numeric(const std::string& name) const;
    const std::vector<std::string>& categorical(const std::string& name) const;

    void add_numeric(const std::string& name, std::vector<double> values);
    void add_categorical(const std::string& name, std::vector<std::string> labels);

    // Sorted distinct labels of a categorical column.
    std::vector<std::string> levels(const std::string& name) const;

    // Row subset, preserving order of `rows`.
    AnalysisTable subset(const std::vector<std::size_t>& rows) const;

    bool operator==(const AnalysisTable& other) const;

    // CSV, header row, numeric cells formatted at 9 significant digits.
    void write_csv(std::ostream& os) const;
    static AnalysisTable read_csv(std::istream& is);

private:
    void check_size(std::size_t n, const std::string& name);

    std::size_t n_rows_ = 0;
    bool empty_ = true;
    std::vector<Column> columns_;
};

} // namespace n400

#endif
