#include "monoglm/observation_table.hpp"

#include "monoglm/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace monoglm {

namespace {

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA"; }

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

// Splits one CSV record. Double quotes enclose fields; "" inside quotes is a literal quote.
std::vector<std::string> split_record(const std::string& line, std::size_t line_number) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            if (!trim(field).empty())
                throw InputError("line " + std::to_string(line_number) + ": stray quote in field");
            field.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(was_quoted ? field : trim(field));
            field.clear();
            was_quoted = false;
        } else {
            field.push_back(c);
        }
    }
    if (quoted) throw InputError("line " + std::to_string(line_number) + ": unterminated quote");
    fields.push_back(was_quoted ? field : trim(field));
    return fields;
}

} // namespace

ObservationTable::ObservationTable(std::vector<std::string> names,
                                   std::vector<std::vector<std::string>> columns)
    : names_(std::move(names)), columns_(std::move(columns)) {
    if (names_.size() != columns_.size())
        throw InputError("column names and column data differ in count");
    for (std::size_t c = 0; c < names_.size(); ++c) {
        if (names_[c].empty()) throw InputError("empty column name at position " + std::to_string(c + 1));
        if (!index_.emplace(names_[c], c).second) throw InputError("duplicate column '" + names_[c] + "'");
        if (c > 0 && columns_[c].size() != columns_[0].size())
            throw InputError("column '" + names_[c] + "' has a different length");
    }
    rows_ = columns_.empty() ? 0 : columns_[0].size();
    lines_.resize(rows_);
    for (std::size_t r = 0; r < rows_; ++r) lines_[r] = r + 2;
}

std::size_t ObservationTable::line_of(std::size_t row) const { return lines_.at(row); }

ObservationTable ObservationTable::from_csv(std::istream& in) {
    std::string line;
    std::size_t line_number = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_number;
        if (line_number == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (!trim(line).empty()) {
            header = split_record(line, line_number);
            break;
        }
    }
    if (header.empty()) throw InputError("CSV input has no header row");

    std::vector<std::vector<std::string>> columns(header.size());
    std::vector<std::size_t> lines;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        auto fields = split_record(line, line_number);
        if (fields.size() != header.size()) {
            throw InputError("line " + std::to_string(line_number) + ": expected " +
                             std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) columns[c].push_back(std::move(fields[c]));
        lines.push_back(line_number);
    }
    ObservationTable table(std::move(header), std::move(columns));
    table.lines_ = std::move(lines);
    return table;
}

ObservationTable ObservationTable::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open data file '" + path + "'");
    return from_csv(in);
}

bool ObservationTable::has_column(std::string_view name) const {
    return index_.contains(std::string(name));
}

std::size_t ObservationTable::index_of(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    if (it == index_.end()) throw InputError("column '" + std::string(name) + "' not found in data");
    return it->second;
}

void ObservationTable::check_complete(std::size_t column) const {
    const auto& cells = columns_[column];
    for (std::size_t r = 0; r < cells.size(); ++r) {
        if (is_missing(cells[r])) {
            throw InputError("missing value in column '" + names_[column] + "' at line " +
                             std::to_string(lines_[r]));
        }
    }
}

const std::vector<std::string>& ObservationTable::labels(std::string_view name) const {
    const auto c = index_of(name);
    check_complete(c);
    return columns_[c];
}

Eigen::VectorXd ObservationTable::numeric(std::string_view name) const {
    const auto c = index_of(name);
    check_complete(c);
    const auto& cells = columns_[c];
    Eigen::VectorXd out(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t r = 0; r < cells.size(); ++r) {
        const auto& s = cells[r];
        double value = 0.0;
        const auto* begin = s.data();
        const auto* end = s.data() + s.size();
        if (*begin == '+') ++begin;
        const auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr != end) {
            throw InputError("column '" + names_[c] + "' line " + std::to_string(lines_[r]) +
                             ": cannot parse '" + s + "' as a number");
        }
        out[static_cast<Eigen::Index>(r)] = value;
    }
    return out;
}

} // namespace monoglm
