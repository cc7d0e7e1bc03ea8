#include "shortfall/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "shortfall/errors.hpp"
#include "shortfall/format.hpp"

namespace shortfall {

ReturnPanel::ReturnPanel(std::vector<Date> dates, std::vector<std::string> names,
                         Eigen::MatrixXd returns)
    : dates_(std::move(dates)), names_(std::move(names)), returns_(std::move(returns)) {
    if (names_.empty()) throw ValidationError("panel needs at least one column");
    if (dates_.empty()) throw ValidationError("panel needs at least one row");
    if (static_cast<Eigen::Index>(dates_.size()) != returns_.rows() ||
        static_cast<Eigen::Index>(names_.size()) != returns_.cols()) {
        throw ValidationError("panel shape does not match dates/names");
    }
    std::unordered_set<std::string> seen;
    for (const auto& name : names_) {
        if (name.empty()) throw ValidationError("empty column name");
        if (!seen.insert(name).second) throw ValidationError("duplicate column name '" + name + "'");
    }
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!(dates_[i - 1] < dates_[i])) {
            throw ValidationError("dates not strictly increasing at row " + std::to_string(i + 1) +
                                  " (" + dates_[i].to_string() + ")");
        }
    }
    for (Eigen::Index r = 0; r < returns_.rows(); ++r) {
        for (Eigen::Index c = 0; c < returns_.cols(); ++c) {
            if (!std::isfinite(returns_(r, c))) {
                throw ValidationError("missing or non-finite value at row " + std::to_string(r + 1) +
                                      ", column '" + names_[static_cast<std::size_t>(c)] + "'");
            }
        }
    }
}

std::optional<Eigen::Index> ReturnPanel::column_index(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<Eigen::Index>(it - names_.begin());
}

Eigen::Index ReturnPanel::count_before(const Date& date) const {
    return static_cast<Eigen::Index>(std::lower_bound(dates_.begin(), dates_.end(), date) -
                                     dates_.begin());
}

ReturnPanel ReturnPanel::slice_rows(Eigen::Index begin, Eigen::Index count) const {
    std::vector<Date> d(dates_.begin() + begin, dates_.begin() + begin + count);
    return ReturnPanel(std::move(d), names_, returns_.middleRows(begin, count));
}

namespace {

std::vector<std::string> split(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, delimiter)) cells.push_back(cell);
    if (!line.empty() && line.back() == delimiter) cells.emplace_back();
    return cells;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string location(std::size_t line, std::size_t column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

ReturnPanel parse_panel(const std::string& text, const CsvFormat& format) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV input");
    auto header = split(line, format.delimiter);
    for (auto& h : header) h = trim(h);
    if (header.size() < 2) throw ParseError("header needs a date column and at least one series");
    std::vector<std::string> names(header.begin() + 1, header.end());
    const std::size_t n = names.size();

    std::vector<Date> dates;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split(line, format.delimiter);
        if (cells.size() != n + 1) {
            throw ParseError("expected " + std::to_string(n + 1) + " cells on line " +
                             std::to_string(line_no) + ", found " + std::to_string(cells.size()));
        }
        try {
            dates.push_back(Date::parse(trim(cells[0])));
        } catch (const ParseError& e) {
            throw ParseError(location(line_no, 1) + ": " + e.what());
        }
        for (std::size_t c = 1; c <= n; ++c) {
            const std::string cell = trim(cells[c]);
            if (cell.empty()) {
                throw ParseError(location(line_no, c + 1) + " ('" + names[c - 1] + "'): empty cell");
            }
            double v = 0.0;
            const char* first = cell.data();
            if (*first == '+') ++first;
            auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw ParseError(location(line_no, c + 1) + " ('" + names[c - 1] +
                                 "'): not a number: '" + cell + "'");
            }
            values.push_back(v);
        }
    }
    if (dates.empty()) throw ValidationError("CSV has a header but no data rows");

    Eigen::MatrixXd returns(static_cast<Eigen::Index>(dates.size()), static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < returns.rows(); ++r) {
        for (Eigen::Index c = 0; c < returns.cols(); ++c) {
            returns(r, c) = values[static_cast<std::size_t>(r) * n + static_cast<std::size_t>(c)];
        }
    }
    return ReturnPanel(std::move(dates), std::move(names), std::move(returns));
}

ReturnPanel load_panel(const std::filesystem::path& path, const CsvFormat& format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open panel file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_panel(buffer.str(), format);
}

std::string format_panel(const ReturnPanel& panel) {
    std::string out = "date";
    for (const auto& name : panel.names()) out += "," + name;
    out += "\n";
    for (Eigen::Index r = 0; r < panel.rows(); ++r) {
        out += panel.dates()[static_cast<std::size_t>(r)].to_string();
        for (Eigen::Index c = 0; c < panel.cols(); ++c) {
            out += ",";
            out += format_number(panel.returns()(r, c));
        }
        out += "\n";
    }
    return out;
}

void write_panel(const ReturnPanel& panel, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << format_panel(panel);
}

ReturnPanel slice_window(const ReturnPanel& panel, const Date& end_date,
                         std::optional<Eigen::Index> max_length) {
    const Eigen::Index qualifying = panel.count_before(end_date);
    if (qualifying == 0) {
        throw EmptyWindowError("no observations before " + end_date.to_string());
    }
    Eigen::Index count = qualifying;
    if (max_length) {
        if (*max_length < 1) throw ValidationError("max_length must be positive");
        count = std::min(count, *max_length);
    }
    return panel.slice_rows(qualifying - count, count);
}

}  // namespace shortfall
