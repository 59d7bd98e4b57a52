#pragma once
/**
 * @file csv.hpp
 * @brief Result rows and their CSV encoding.
 *
 * Comma separated, one header row, doubles in scientific notation with 17
 * significant digits so every value round-trips exactly. Non-finite values
 * are written as nan / inf / -inf.
 */

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nform/config.hpp"
#include "nform/metrics.hpp"

namespace nform {

struct ResultRow {
    std::string method;
    std::string penalty;  ///< per_point | once for mtsm, none for tsm
    std::string optimizer;
    std::string init;  ///< const | uniform
    double init_lo = 0.0;  ///< equals init_hi for constant initialization
    double init_hi = 0.0;
    std::uint64_t layers = 0;
    std::uint64_t neurons = 0;
    std::uint64_t ntp = 0;
    double lambda = 0.0;
    double u0 = 0.0;
    double xend = 0.0;
    std::uint64_t kmax = 0;
    std::uint64_t seed = 0;
    std::string fingerprint;
    double delta_u = 0.0;   ///< grid-averaged l1 error
    double l1_error = 0.0;  ///< plain l1 sum over the grid
    double final_cost = 0.0;
    bool diverged = false;
    std::uint64_t epochs = 0;
    double wall_ms = 0.0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

ResultRow make_row(const RunSpec& spec, const RunRecord& record, bool timing);

std::string format_double(double v);
/// Inverse of format_double; throws std::invalid_argument on malformed text.
double parse_double(std::string_view text);

std::string_view result_header() noexcept;
std::string format_row(const ResultRow& row);
ResultRow parse_row(std::string_view line);

void write_rows(std::ostream& out, std::span<const ResultRow> rows);
std::vector<ResultRow> read_rows(std::istream& in);

/// Generic table writer used for panel and summary files.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}
    CsvWriter& header(std::initializer_list<std::string_view> names);
    CsvWriter& cell(double v);
    CsvWriter& cell(std::uint64_t v);
    CsvWriter& cell(std::string_view v);
    void end_row();

private:
    void separator();
    std::ostream& out_;
    bool fresh_ = true;
};

}  // namespace nform
