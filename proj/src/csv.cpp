#include "nform/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace nform {

namespace {

constexpr std::string_view kHeader =
    "method,penalty,optimizer,init,init_lo,init_hi,layers,neurons,ntp,lambda,u0,xend,kmax,seed,"
    "fingerprint,delta_u,l1_error,final_cost,diverged,epochs,wall_ms";
constexpr std::size_t kColumns = 21;

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::uint64_t parse_uint(std::string_view text) {
    const std::string s(text);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || s.front() == '-') {
        throw std::invalid_argument("malformed integer field '" + s + "'");
    }
    return v;
}

}  // namespace

ResultRow make_row(const RunSpec& spec, const RunRecord& record, bool timing) {
    const TrainingConfig& t = spec.training;
    ResultRow row;
    row.method = std::string(to_string(t.method));
    row.penalty = t.method == Method::MTSM ? std::string(to_string(t.penalty)) : "none";
    row.optimizer = std::string(to_string(t.optimizer));
    if (t.init.kind == InitSpec::Kind::Constant) {
        row.init = "const";
        row.init_lo = row.init_hi = t.init.value;
    } else {
        row.init = "uniform";
        row.init_lo = t.init.lo;
        row.init_hi = t.init.hi;
    }
    row.layers = t.arch.hidden_layers;
    row.neurons = t.arch.neurons;
    row.ntp = spec.ntp;
    row.lambda = spec.ivp.lambda;
    row.u0 = spec.ivp.u0;
    row.xend = spec.ivp.x_end;
    row.kmax = t.k_max;
    row.seed = record.seed;
    row.fingerprint = record.fingerprint;
    row.delta_u = record.delta_u;
    row.l1_error = record.l1_error;
    row.final_cost = record.final_cost;
    row.diverged = record.diverged;
    row.epochs = record.epochs;
    row.wall_ms = timing ? record.wall_ms : 0.0;
    return row;
}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

double parse_double(std::string_view text) {
    const std::string s(text);
    if (s == "nan") {
        return std::nan("");
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw std::invalid_argument("malformed number field '" + s + "'");
    }
    return v;
}

std::string_view result_header() noexcept {
    return kHeader;
}

std::string format_row(const ResultRow& r) {
    std::string out;
    out.reserve(320);
    auto add = [&out](std::string_view field) {
        if (!out.empty()) {
            out.push_back(',');
        }
        out.append(field);
    };
    add(r.method);
    add(r.penalty);
    add(r.optimizer);
    add(r.init);
    add(format_double(r.init_lo));
    add(format_double(r.init_hi));
    add(std::to_string(r.layers));
    add(std::to_string(r.neurons));
    add(std::to_string(r.ntp));
    add(format_double(r.lambda));
    add(format_double(r.u0));
    add(format_double(r.xend));
    add(std::to_string(r.kmax));
    add(std::to_string(r.seed));
    add(r.fingerprint);
    add(format_double(r.delta_u));
    add(format_double(r.l1_error));
    add(format_double(r.final_cost));
    add(r.diverged ? "1" : "0");
    add(std::to_string(r.epochs));
    add(format_double(r.wall_ms));
    return out;
}

ResultRow parse_row(std::string_view line) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    const auto f = split_fields(line);
    if (f.size() != kColumns) {
        throw std::invalid_argument("expected " + std::to_string(kColumns) + " columns, got " +
                                    std::to_string(f.size()));
    }
    ResultRow r;
    r.method = f[0];
    r.penalty = f[1];
    r.optimizer = f[2];
    r.init = f[3];
    r.init_lo = parse_double(f[4]);
    r.init_hi = parse_double(f[5]);
    r.layers = parse_uint(f[6]);
    r.neurons = parse_uint(f[7]);
    r.ntp = parse_uint(f[8]);
    r.lambda = parse_double(f[9]);
    r.u0 = parse_double(f[10]);
    r.xend = parse_double(f[11]);
    r.kmax = parse_uint(f[12]);
    r.seed = parse_uint(f[13]);
    r.fingerprint = f[14];
    r.delta_u = parse_double(f[15]);
    r.l1_error = parse_double(f[16]);
    r.final_cost = parse_double(f[17]);
    if (f[18] != "0" && f[18] != "1") {
        throw std::invalid_argument("diverged column must be 0 or 1");
    }
    r.diverged = f[18] == "1";
    r.epochs = parse_uint(f[19]);
    r.wall_ms = parse_double(f[20]);
    return r;
}

void write_rows(std::ostream& out, std::span<const ResultRow> rows) {
    out << kHeader << '\n';
    for (const ResultRow& r : rows) {
        out << format_row(r) << '\n';
    }
}

std::vector<ResultRow> read_rows(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("empty CSV input");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kHeader) {
        throw std::invalid_argument("unexpected CSV header");
    }
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        rows.push_back(parse_row(line));
    }
    return rows;
}

CsvWriter& CsvWriter::header(std::initializer_list<std::string_view> names) {
    for (const auto name : names) {
        cell(name);
    }
    end_row();
    return *this;
}

void CsvWriter::separator() {
    if (!fresh_) {
        out_ << ',';
    }
    fresh_ = false;
}

CsvWriter& CsvWriter::cell(double v) {
    separator();
    out_ << format_double(v);
    return *this;
}

CsvWriter& CsvWriter::cell(std::uint64_t v) {
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
    separator();
    out_ << v;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    fresh_ = true;
}

}  // namespace nform
