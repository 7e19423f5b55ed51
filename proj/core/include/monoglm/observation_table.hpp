#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace monoglm {

/**
 * Immutable columnar dataset read from a headered CSV file.
 *
 * Cells are stored as the raw strings from the file; typed access goes through numeric(),
 * which reports the offending line when a value does not parse. Missing values (empty cells
 * or "NA") are rejected when a column is read, never imputed.
 */
class ObservationTable {
  public:
    ObservationTable() = default;

    /// Builds a table from named columns of equal length. Line numbers reported by numeric()
    /// assume a header on line 1.
    ObservationTable(std::vector<std::string> names, std::vector<std::vector<std::string>> columns);

    /// Parses comma-separated text with a header row. Fields may be double-quoted.
    static ObservationTable from_csv(std::istream& in);
    static ObservationTable read_csv(const std::string& path);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    bool has_column(std::string_view name) const;
    /// Source line of a data row (1-based, header on line 1).
    std::size_t line_of(std::size_t row) const;

    /// Raw labels, as used for ordered factors. Throws InputError on unknown column or missing values.
    const std::vector<std::string>& labels(std::string_view name) const;

    /// Column parsed as real numbers with "." as decimal point.
    Eigen::VectorXd numeric(std::string_view name) const;

  private:
    std::size_t index_of(std::string_view name) const;
    void check_complete(std::size_t column) const;

    std::vector<std::string> names_;
    std::vector<std::vector<std::string>> columns_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::size_t> lines_;
    std::size_t rows_ = 0;
};

} // namespace monoglm
