#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shortfall/date.hpp"

namespace shortfall {

/// Dated T x N matrix of simple periodic returns with named columns.
///
/// The constructor validates every invariant (strictly increasing dates,
/// unique non-empty names, finite values, T >= 1, N >= 1), so any panel
/// that exists is valid. Panels are immutable once built.
class ReturnPanel {
public:
    ReturnPanel(std::vector<Date> dates, std::vector<std::string> names, Eigen::MatrixXd returns);

    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<std::string>& names() const { return names_; }
    const Eigen::MatrixXd& returns() const { return returns_; }

    Eigen::Index rows() const { return returns_.rows(); }
    Eigen::Index cols() const { return returns_.cols(); }

    /// Column position of `name`, or nullopt.
    std::optional<Eigen::Index> column_index(const std::string& name) const;

    /// Number of rows dated strictly before `date`.
    Eigen::Index count_before(const Date& date) const;

    /// Rows [begin, begin + count) as a new panel.
    ReturnPanel slice_rows(Eigen::Index begin, Eigen::Index count) const;

private:
    std::vector<Date> dates_;
    std::vector<std::string> names_;
    Eigen::MatrixXd returns_;
};

/// Layout of a panel CSV file. The defaults match the toolkit's own writer.
struct CsvFormat {
    char delimiter = ',';
};

/// Reads `date,<name1>,...,<nameN>` CSV. Throws ParseError for malformed
/// cells (with row/column) and ValidationError for invariant violations.
ReturnPanel load_panel(const std::filesystem::path& path, const CsvFormat& format = {});

/// Parses panel CSV text already in memory.
ReturnPanel parse_panel(const std::string& text, const CsvFormat& format = {});

/// Writes the panel using shortest round-trip number formatting.
void write_panel(const ReturnPanel& panel, const std::filesystem::path& path);
std::string format_panel(const ReturnPanel& panel);

/// Rows dated strictly before `end_date`, keeping only the most recent
/// `max_length` of them when given. Throws EmptyWindowError if none qualify.
ReturnPanel slice_window(const ReturnPanel& panel, const Date& end_date,
                         std::optional<Eigen::Index> max_length = std::nullopt);

}  // namespace shortfall
