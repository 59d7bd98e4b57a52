#include "nform/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace nform {

namespace {

/// One sweep point of one panel: a constant-init run followed by `runs`
/// uniform-init members.
struct Group {
    std::size_t panel = 0;
    double value = 0.0;
    std::size_t const_job = 0;
    std::size_t first_random = 0;
};

struct Panel {
    std::string file;  ///< without extension
    std::string axis;
    Method method = Method::MTSM;
    OptimizerKind optimizer = OptimizerKind::Adam;
    std::size_t ntp = 10;
};

using AxisSetter = std::function<void(RunSpec&, double)>;

class SweepBuilder {
public:
    explicit SweepBuilder(const ExperimentSpec& spec) : spec_(spec) {}

    /// Adds one panel per (method, optimizer, ntp) combination for `axis`.
    void add_axis(const std::string& prefix, const std::string& axis,
                  std::span<const double> values, const AxisSetter& set, bool centered) {
        for (const Method m : spec_.methods) {
            for (const OptimizerKind o : spec_.optimizers) {
                for (const std::size_t n : spec_.ntps) {
                    Panel panel;
                    panel.file = prefix + "_" + std::string(to_string(m)) + "_" +
                                 std::string(to_string(o)) + "_ntp" + std::to_string(n);
                    panel.axis = axis;
                    panel.method = m;
                    panel.optimizer = o;
                    panel.ntp = n;
                    panels.push_back(panel);
                    for (const double v : values) {
                        add_group(panels.size() - 1, v, set, centered);
                    }
                }
            }
        }
    }

    std::vector<Panel> panels;
    std::vector<Group> groups;
    std::vector<RunSpec> jobs;

private:
    void add_group(std::size_t panel_index, double value, const AxisSetter& set, bool centered) {
        const Panel& panel = panels[panel_index];
        RunSpec spec = spec_.base;
        spec.training.method = panel.method;
        spec.training.optimizer = panel.optimizer;
        spec.ntp = panel.ntp;
        if (set) {
            set(spec, value);
        }

        Group g;
        g.panel = panel_index;
        g.value = value;
        const std::uint64_t group_seed = mix_seed(spec_.base_seed, groups.size());

        RunSpec constant = spec;
        constant.training.init.kind = InitSpec::Kind::Constant;
        constant.training.init.value = centered ? value : spec_.base.training.init.value;
        constant.validate();
        g.const_job = jobs.size();
        jobs.push_back(constant);

        g.first_random = jobs.size();
        for (std::size_t r = 0; r < spec_.runs; ++r) {
            RunSpec member = spec;
            InitSpec& init = member.training.init;
            init.kind = InitSpec::Kind::Uniform;
            if (centered) {
                init.lo = value - 0.5 * spec_.width;
                init.hi = value + 0.5 * spec_.width;
            } else {
                init.lo = spec_.base.training.init.lo;
                init.hi = spec_.base.training.init.hi;
            }
            init.seed = mix_seed(group_seed, r);
            member.validate();
            jobs.push_back(member);
        }
        groups.push_back(g);
    }

    const ExperimentSpec& spec_;
};

std::string runs_table(std::span<const ResultRow> rows) {
    std::ostringstream out;
    write_rows(out, rows);
    return out.str();
}

std::vector<ResultRow> make_rows(std::span<const RunSpec> specs,
                                 std::span<const RunRecord> records, bool timing) {
    std::vector<ResultRow> rows;
    rows.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        rows.push_back(make_row(specs[i], records[i], timing));
    }
    return rows;
}

std::span<const RunRecord> members(const Group& g, std::span<const RunRecord> records,
                                   std::size_t runs) {
    return records.subspan(g.first_random, runs);
}

std::vector<OutputFile> panel_files(const SweepBuilder& sweep, std::span<const RunRecord> records,
                                    std::size_t runs) {
    std::vector<OutputFile> files;
    for (std::size_t p = 0; p < sweep.panels.size(); ++p) {
        const Panel& panel = sweep.panels[p];
        std::ostringstream out;
        CsvWriter csv(out);
        csv.header({panel.axis, "delta_u_const", "mean_delta_u_rnd", "rnd_count", "rnd_diverged"});
        for (const Group& g : sweep.groups) {
            if (g.panel != p) {
                continue;
            }
            const RunRecord& c = records[g.const_job];
            const AverageError avg = average_error(members(g, records, runs));
            csv.cell(g.value).cell(c.delta_u).cell(avg.mean);
            csv.cell(static_cast<std::uint64_t>(avg.count))
                .cell(static_cast<std::uint64_t>(avg.diverged));
            csv.end_row();
        }
        files.push_back({panel.file + ".csv", out.str()});
    }
    return files;
}

void append_history(std::ostringstream& out, std::size_t run, const RunRecord& r) {
    for (const HistoryPoint& h : r.history) {
        out << run << ',' << h.epoch << ',' << format_double(h.cost) << ','
            << format_double(h.delta_u) << '\n';
    }
}

void append_weights(std::ostringstream& out, std::size_t run, const RunRecord& r) {
    for (std::size_t i = 0; i < r.final_weights.size(); ++i) {
        out << run << ',' << i << ',' << format_double(r.final_weights[i]) << '\n';
    }
}

void add_extras(ExperimentOutput& output, const std::string& prefix, const ExperimentSpec& spec,
                std::span<const RunRecord> records) {
    if (spec.history) {
        std::ostringstream out;
        out << "run,epoch,cost,delta_u\n";
        for (std::size_t i = 0; i < records.size(); ++i) {
            append_history(out, i, records[i]);
        }
        output.files.push_back({prefix + "_history.csv", out.str()});
    }
    if (spec.weights) {
        std::ostringstream out;
        out << "run,index,value\n";
        for (std::size_t i = 0; i < records.size(); ++i) {
            append_weights(out, i, records[i]);
        }
        output.files.push_back({prefix + "_weights.csv", out.str()});
    }
}

void write_summary_row(CsvWriter& csv, const EnsembleSummary& s) {
    csv.cell(static_cast<std::uint64_t>(s.count)).cell(static_cast<std::uint64_t>(s.diverged));
    csv.cell(s.mean).cell(s.stddev).cell(s.q10).cell(s.q20).cell(s.q30).cell(s.min).cell(s.max);
}

ExperimentOutput run_sweep(const ExperimentSpec& spec) {
    SweepBuilder sweep(spec);
    const std::string prefix(to_string(spec.id));
    switch (spec.id) {
        case ExperimentId::Exp1:
            sweep.add_axis(prefix, "init_value", spec.values, nullptr, true);
            break;
        case ExperimentId::Exp2:
            sweep.add_axis(prefix, "neurons", spec.values,
                           [](RunSpec& s, double v) {
                               s.training.arch.neurons = static_cast<std::size_t>(v);
                           },
                           false);
            break;
        case ExperimentId::Exp3:
            sweep.add_axis(prefix, "layers", spec.values,
                           [](RunSpec& s, double v) {
                               s.training.arch.hidden_layers = static_cast<std::size_t>(v);
                           },
                           false);
            break;
        case ExperimentId::Exp4:
            sweep.add_axis(prefix, "kmax", spec.values,
                           [](RunSpec& s, double v) {
                               s.training.k_max = static_cast<std::uint64_t>(v);
                           },
                           false);
            break;
        case ExperimentId::Exp5:
            sweep.add_axis(prefix + "_lambda", "lambda", spec.values,
                           [](RunSpec& s, double v) { s.ivp.lambda = v; }, false);
            sweep.add_axis(prefix + "_xend", "xend", spec.xend_values,
                           [](RunSpec& s, double v) { s.ivp.x_end = v; }, false);
            break;
        case ExperimentId::Exp6:
            // One group per table cell; the axis is a dummy.
            sweep.add_axis(prefix, "cell", std::vector<double>{0.0}, nullptr, false);
            break;
        default:
            throw ConfigError("command", "not a sweep experiment");
    }

    const std::vector<RunRecord> records = run_batch(sweep.jobs, spec.workers);
    ExperimentOutput output;
    output.rows = make_rows(sweep.jobs, records, spec.timing);
    output.files.push_back({prefix + "_runs.csv", runs_table(output.rows)});

    if (spec.id == ExperimentId::Exp3) {
        std::ostringstream out;
        CsvWriter csv(out);
        out << "ntp,layers";
        for (const OptimizerKind o : spec.optimizers) {
            for (const char* kind : {"const", "rnd"}) {
                for (const Method m : spec.methods) {
                    out << ',' << to_string(o) << '_' << kind << '_' << to_string(m);
                }
            }
        }
        out << '\n';
        for (const std::size_t n : spec.ntps) {
            for (const double layers : spec.values) {
                csv.cell(static_cast<std::uint64_t>(n)).cell(static_cast<std::uint64_t>(layers));
                for (const OptimizerKind o : spec.optimizers) {
                    for (const bool constant : {true, false}) {
                        for (const Method m : spec.methods) {
                            for (const Group& g : sweep.groups) {
                                const Panel& p = sweep.panels[g.panel];
                                if (p.ntp != n || p.optimizer != o || p.method != m ||
                                    g.value != layers) {
                                    continue;
                                }
                                csv.cell(constant ? records[g.const_job].delta_u
                                                  : average_error(members(g, records, spec.runs))
                                                        .mean);
                            }
                        }
                    }
                }
                csv.end_row();
            }
        }
        output.files.push_back({"exp3_table.csv", out.str()});
    } else if (spec.id == ExperimentId::Exp6) {
        std::ostringstream out;
        CsvWriter csv(out);
        csv.header({"method", "ntp", "optimizer", "delta_u_const", "count", "diverged", "mean",
                    "std", "q10", "q20", "q30", "min", "max"});
        for (const Method m : spec.methods) {
            for (const std::size_t n : spec.ntps) {
                for (const OptimizerKind o : spec.optimizers) {
                    for (const Group& g : sweep.groups) {
                        const Panel& p = sweep.panels[g.panel];
                        if (p.ntp != n || p.optimizer != o || p.method != m) {
                            continue;
                        }
                        csv.cell(to_string(m)).cell(static_cast<std::uint64_t>(n)).cell(to_string(o));
                        csv.cell(records[g.const_job].delta_u);
                        write_summary_row(csv, summarize(members(g, records, spec.runs)));
                        csv.end_row();
                    }
                }
            }
        }
        output.files.push_back({"exp6_stats.csv", out.str()});
    } else {
        for (OutputFile& f : panel_files(sweep, records, spec.runs)) {
            output.files.push_back(std::move(f));
        }
    }
    add_extras(output, prefix, spec, records);
    return output;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) noexcept {
    std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn) {
    const std::size_t threads = std::min<std::size_t>(std::max(1u, workers), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next = count;
                }
            }
        });
    }
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

std::vector<RunRecord> run_batch(std::span<const RunSpec> specs, unsigned workers) {
    for (const RunSpec& s : specs) {
        s.validate();
    }
    std::vector<RunRecord> records(specs.size());
    parallel_for(specs.size(), workers, [&](std::size_t i) {
        records[i] = train(specs[i].training, specs[i].ivp, specs[i].grid());
    });
    return records;
}

RunRecord run_single(const RunSpec& spec) {
    spec.validate();
    return train(spec.training, spec.ivp, spec.grid());
}

EnsembleResult run_ensemble(const RunSpec& base, std::size_t runs, std::uint64_t base_seed,
                            unsigned workers) {
    if (runs < 1) {
        throw ConfigError("runs", "at least one run is required");
    }
    EnsembleResult result;
    result.specs.assign(runs, base);
    for (std::size_t r = 0; r < runs; ++r) {
        InitSpec& init = result.specs[r].training.init;
        init.kind = InitSpec::Kind::Uniform;
        init.seed = mix_seed(base_seed, r);
    }
    result.records = run_batch(result.specs, workers);
    result.summary = summarize(result.records);
    result.average = average_error(result.records);
    return result;
}

ExperimentOutput run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentOutput output;
    switch (spec.id) {
        case ExperimentId::Single: {
            const RunRecord record = run_single(spec.base);
            output.rows.push_back(make_row(spec.base, record, spec.timing));
            output.files.push_back({"single_runs.csv", runs_table(output.rows)});
            add_extras(output, "single", spec, std::span<const RunRecord>(&record, 1));
            return output;
        }
        case ExperimentId::Ensemble: {
            const EnsembleResult e = run_ensemble(spec.base, spec.runs, spec.base_seed,
                                                  spec.workers);
            output.rows = make_rows(e.specs, e.records, spec.timing);
            output.files.push_back({"ensemble_runs.csv", runs_table(output.rows)});
            std::ostringstream out;
            CsvWriter csv(out);
            csv.header({"count", "diverged", "mean", "std", "q10", "q20", "q30", "min", "max"});
            write_summary_row(csv, e.summary);
            csv.end_row();
            output.files.push_back({"ensemble_summary.csv", out.str()});
            add_extras(output, "ensemble", spec, e.records);
            return output;
        }
        case ExperimentId::GradCheck:
            throw ConfigError("command", "gradcheck is not a training experiment");
        default:
            return run_sweep(spec);
    }
}

std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir,
                                                 const ExperimentOutput& output) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    std::vector<std::filesystem::path> written;
    for (const OutputFile& f : output.files) {
        const std::filesystem::path path = dir / f.name;
        std::ofstream out(path, std::ios::binary);
        out << f.content;
        out.close();
        if (!out) {
            throw IoError("cannot write " + path.string());
        }
        written.push_back(path);
    }
    return written;
}

}  // namespace nform
