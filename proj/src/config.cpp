#include "nform/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace nform {

namespace {

constexpr std::string_view kKeys[] = {
    "method",     "optimizer",   "init",       "init_value", "init_lo",    "init_hi",
    "layers",     "neurons",     "ntp",        "kmax",       "lambda",     "xend",
    "u0",         "seed",        "runs",       "workers",    "values",     "xend_values",
    "methods",    "optimizers",  "ntps",       "width",      "timing",     "history",
    "weights",    "cbp_alpha",   "cbp_beta",   "vbp_alpha0", "vbp_alpha_e", "vbp_kc",
    "vbp_beta",   "adam_alpha",  "adam_beta1", "adam_beta2", "adam_eps",   "penalty"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

double to_double(std::string_view field, std::string_view text) {
    const std::string s(trim(text));
    if (s.empty()) {
        throw ConfigError(std::string(field), "expected a number, got an empty value");
    }
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError(std::string(field), "expected a finite number, got '" + s + "'");
    }
    return v;
}

std::uint64_t to_uint(std::string_view field, std::string_view text) {
    const std::string s(trim(text));
    // Accept integral values written in scientific notation (kmax=1e5).
    const double d = to_double(field, s);
    if (d < 0.0 || d != std::floor(d) || d > 1.8e19) {
        throw ConfigError(std::string(field), "expected a non-negative integer, got '" + s + "'");
    }
    if (s.find_first_of(".eE") == std::string::npos) {
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
        if (errno == ERANGE || end != s.c_str() + s.size()) {
            throw ConfigError(std::string(field), "integer out of range: '" + s + "'");
        }
        return v;
    }
    return static_cast<std::uint64_t>(d);
}

bool to_bool(std::string_view field, std::string_view text) {
    const std::string_view s = trim(text);
    if (s == "1" || s == "true" || s == "yes" || s == "on") {
        return true;
    }
    if (s == "0" || s == "false" || s == "no" || s == "off") {
        return false;
    }
    throw ConfigError(std::string(field), "expected 0 or 1, got '" + std::string(s) + "'");
}

/// Comma-separated numbers, or a single "first:step:last" range.
std::vector<double> to_double_list(std::string_view field, std::string_view text) {
    const std::string_view s = trim(text);
    if (s.find(':') != std::string_view::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 3) {
            throw ConfigError(std::string(field), "range must be first:step:last");
        }
        const double first = to_double(field, parts[0]);
        const double step = to_double(field, parts[1]);
        const double last = to_double(field, parts[2]);
        if (step == 0.0 || (last - first) * step < 0.0) {
            throw ConfigError(std::string(field), "range step does not reach the last value");
        }
        return linear_range(first, last, step);
    }
    std::vector<double> out;
    for (const auto part : split(s, ',')) {
        out.push_back(to_double(field, part));
    }
    return out;
}

template <typename T, typename Parse>
std::vector<T> to_list(std::string_view field, std::string_view text, Parse parse) {
    std::vector<T> out;
    for (const auto part : split(trim(text), ',')) {
        try {
            out.push_back(parse(part));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string(field), e.what());
        }
    }
    return out;
}

}  // namespace

std::span<const std::string_view> known_keys() noexcept {
    return kKeys;
}

KeyValues parse_key_values(std::string_view text) {
    KeyValues kv;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++line_no;
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no), "expected key=value");
        }
        const std::string key(trim(line.substr(0, eq)));
        const auto keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError(key, "unknown key (line " + std::to_string(line_no) + ")");
        }
        kv[key] = std::string(trim(line.substr(eq + 1)));
        if (end == text.size()) {
            break;
        }
    }
    return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_key_values(buf.str());
}

void RunSpec::validate() const {
    try {
        training.validate();
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        throw ConfigError(msg.substr(0, msg.find(':')), msg.substr(msg.find(':') + 2));
    }
    if (ntp < 2) {
        throw ConfigError("ntp", "a grid needs at least two points");
    }
    if (!(ivp.x_end > 0.0) || !std::isfinite(ivp.x_end)) {
        throw ConfigError("xend", "domain end must be positive");
    }
    if (!std::isfinite(ivp.lambda)) {
        throw ConfigError("lambda", "must be finite");
    }
}

std::string_view to_string(ExperimentId id) noexcept {
    switch (id) {
        case ExperimentId::Single:
            return "single";
        case ExperimentId::Ensemble:
            return "ensemble";
        case ExperimentId::Exp1:
            return "exp1";
        case ExperimentId::Exp2:
            return "exp2";
        case ExperimentId::Exp3:
            return "exp3";
        case ExperimentId::Exp4:
            return "exp4";
        case ExperimentId::Exp5:
            return "exp5";
        case ExperimentId::Exp6:
            return "exp6";
        case ExperimentId::GradCheck:
            return "gradcheck";
    }
    return "single";
}

ExperimentId parse_experiment_id(std::string_view text) {
    for (const ExperimentId id :
         {ExperimentId::Single, ExperimentId::Ensemble, ExperimentId::Exp1, ExperimentId::Exp2,
          ExperimentId::Exp3, ExperimentId::Exp4, ExperimentId::Exp5, ExperimentId::Exp6,
          ExperimentId::GradCheck}) {
        if (to_string(id) == text) {
            return id;
        }
    }
    throw ConfigError("command", "unknown experiment '" + std::string(text) + "'");
}

void ExperimentSpec::validate() const {
    base.validate();
    if (runs < 1) {
        throw ConfigError("runs", "at least one run is required");
    }
    if (workers < 1) {
        throw ConfigError("workers", "at least one worker is required");
    }
    const bool sweeps = id != ExperimentId::Single && id != ExperimentId::Ensemble &&
                        id != ExperimentId::Exp6 && id != ExperimentId::GradCheck;
    if (sweeps && values.empty()) {
        throw ConfigError("values", "sweep values must not be empty");
    }
    if (id == ExperimentId::Exp5 && xend_values.empty()) {
        throw ConfigError("xend_values", "sweep values must not be empty");
    }
    if (!(width > 0.0)) {
        throw ConfigError("width", "perturbation width must be positive");
    }
    for (const double v : values) {
        if ((id == ExperimentId::Exp2 || id == ExperimentId::Exp3 || id == ExperimentId::Exp4) &&
            (v < 1.0 || v != std::floor(v))) {
            throw ConfigError("values", "sweep values must be positive integers");
        }
    }
    for (const double v : xend_values) {
        if (!(v > 0.0)) {
            throw ConfigError("xend_values", "domain ends must be positive");
        }
    }
    for (const std::size_t n : ntps) {
        if (n < 2) {
            throw ConfigError("ntps", "a grid needs at least two points");
        }
    }
}

std::vector<double> linear_range(double first, double last, double step) {
    std::vector<double> out;
    const double span = (last - first) / step;
    const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double v = first + static_cast<double>(i) * step;
        // Snap values like 0.30000000000000004 onto the decimal grid.
        v = std::round(v * 1e12) / 1e12;
        out.push_back(v);
    }
    return out;
}

ExperimentSpec build_spec(ExperimentId id, const KeyValues& kv) {
    ExperimentSpec spec;
    spec.id = id;
    spec.workers = std::max(1u, std::thread::hardware_concurrency());
    spec.methods = {Method::TSM, Method::MTSM};
    spec.optimizers = {OptimizerKind::CBP, OptimizerKind::Adam};
    spec.ntps = {10, 20, 40};
    spec.runs = 100;
    spec.base.training.init.kind = InitSpec::Kind::Constant;

    switch (id) {
        case ExperimentId::Single:
            spec.runs = 1;
            break;
        case ExperimentId::Ensemble:
            spec.base.training.init.kind = InitSpec::Kind::Uniform;
            break;
        case ExperimentId::Exp1:
            spec.values = linear_range(-1.0, 1.0, 0.05);
            break;
        case ExperimentId::Exp2:
            spec.values = linear_range(1.0, 10.0, 1.0);
            break;
        case ExperimentId::Exp3:
            spec.values = linear_range(1.0, 5.0, 1.0);
            break;
        case ExperimentId::Exp4:
            spec.values = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000, 20000,
                           50000, 100000};
            break;
        case ExperimentId::Exp5:
            spec.values = linear_range(-1.0, -10.0, -0.5);
            spec.xend_values = linear_range(0.05, 2.0, 0.05);
            break;
        case ExperimentId::Exp6:
            spec.optimizers = {OptimizerKind::Adam, OptimizerKind::CBP, OptimizerKind::VBP};
            spec.runs = 1000;
            break;
        case ExperimentId::GradCheck:
            spec.runs = 20;
            break;
    }

    TrainingConfig& t = spec.base.training;
    OptimizerSettings& s = t.settings;
    auto get = [&](std::string_view key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto wrap = [](std::string_view key, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            const std::string msg = e.what();
            const auto colon = msg.find(": ");
            throw ConfigError(std::string(key),
                              colon == std::string::npos ? msg : msg.substr(colon + 2));
        }
    };

    if (const auto* v = get("method")) {
        wrap("method", [&] { t.method = parse_method(*v); });
    }
    if (const auto* v = get("penalty")) {
        wrap("penalty", [&] { t.penalty = parse_penalty(*v); });
    }
    if (const auto* v = get("optimizer")) {
        wrap("optimizer", [&] { t.optimizer = parse_optimizer(*v); });
    }
    if (const auto* v = get("init")) {
        if (*v == "const" || *v == "constant") {
            t.init.kind = InitSpec::Kind::Constant;
        } else if (*v == "uniform" || *v == "rnd" || *v == "random") {
            t.init.kind = InitSpec::Kind::Uniform;
        } else {
            throw ConfigError("init", "expected const or uniform, got '" + *v + "'");
        }
    }
    if (const auto* v = get("init_value")) t.init.value = to_double("init_value", *v);
    if (const auto* v = get("init_lo")) t.init.lo = to_double("init_lo", *v);
    if (const auto* v = get("init_hi")) t.init.hi = to_double("init_hi", *v);
    if (const auto* v = get("layers")) t.arch.hidden_layers = to_uint("layers", *v);
    if (const auto* v = get("neurons")) t.arch.neurons = to_uint("neurons", *v);
    if (const auto* v = get("ntp")) spec.base.ntp = to_uint("ntp", *v);
    if (const auto* v = get("kmax")) t.k_max = to_uint("kmax", *v);
    if (const auto* v = get("lambda")) spec.base.ivp.lambda = to_double("lambda", *v);
    if (const auto* v = get("xend")) spec.base.ivp.x_end = to_double("xend", *v);
    if (const auto* v = get("u0")) spec.base.ivp.u0 = to_double("u0", *v);
    if (const auto* v = get("seed")) spec.base_seed = to_uint("seed", *v);
    if (const auto* v = get("runs")) spec.runs = to_uint("runs", *v);
    if (const auto* v = get("workers")) spec.workers = static_cast<unsigned>(to_uint("workers", *v));
    if (const auto* v = get("values")) spec.values = to_double_list("values", *v);
    if (const auto* v = get("xend_values")) spec.xend_values = to_double_list("xend_values", *v);
    if (const auto* v = get("methods")) spec.methods = to_list<Method>("methods", *v, parse_method);
    if (const auto* v = get("optimizers")) {
        spec.optimizers = to_list<OptimizerKind>("optimizers", *v, parse_optimizer);
    }
    if (const auto* v = get("ntps")) {
        spec.ntps.clear();
        for (const double n : to_double_list("ntps", *v)) {
            if (!(n >= 0.0) || n != std::floor(n) || n > 1e9) {
                throw ConfigError("ntps", "expected non-negative integers");
            }
            spec.ntps.push_back(static_cast<std::size_t>(n));
        }
    }
    if (const auto* v = get("width")) spec.width = to_double("width", *v);
    if (const auto* v = get("timing")) spec.timing = to_bool("timing", *v);
    if (const auto* v = get("history")) spec.history = to_bool("history", *v);
    if (const auto* v = get("weights")) spec.weights = to_bool("weights", *v);
    if (const auto* v = get("cbp_alpha")) s.cbp_alpha = to_double("cbp_alpha", *v);
    if (const auto* v = get("cbp_beta")) s.cbp_beta = to_double("cbp_beta", *v);
    if (const auto* v = get("vbp_alpha0")) s.vbp_alpha0 = to_double("vbp_alpha0", *v);
    if (const auto* v = get("vbp_alpha_e")) s.vbp_alpha_end = to_double("vbp_alpha_e", *v);
    if (const auto* v = get("vbp_kc")) s.vbp_decay_epochs = to_uint("vbp_kc", *v);
    if (const auto* v = get("vbp_beta")) s.vbp_beta = to_double("vbp_beta", *v);
    if (const auto* v = get("adam_alpha")) s.adam_alpha = to_double("adam_alpha", *v);
    if (const auto* v = get("adam_beta1")) s.adam_beta1 = to_double("adam_beta1", *v);
    if (const auto* v = get("adam_beta2")) s.adam_beta2 = to_double("adam_beta2", *v);
    if (const auto* v = get("adam_eps")) s.adam_eps = to_double("adam_eps", *v);

    t.record_history = spec.history;
    t.keep_weights = spec.weights;
    spec.validate();
    return spec;
}

}  // namespace nform
