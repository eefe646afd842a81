#include "ponmpc/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ponmpc/errors.hpp"

namespace ponmpc {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::vector<SourceConfig> source_group(double peak_bps, double hurst, double mean_load, int count) {
    std::vector<SourceConfig> group;
    for (int i = 0; i < count; ++i) {
        SourceConfig cfg;
        cfg.peak_bps = peak_bps;
        cfg.hurst = hurst;
        cfg.mean_load = mean_load;
        group.push_back(cfg);
    }
    return group;
}

} // namespace

Scenario desk_scenario() {
    Scenario s;
    s.n_onus = 4;
    s.distance_km = {1.0, 2.5, 4.0, 5.0};
    s.link_bps = 1e9;
    s.slot_s = 5e-4;
    s.guard_s = 5e-6;
    s.control_overhead_bits = 1024;
    s.packet_bits = 10000;
    s.onu_buffer_bits = 10000000;
    s.horizon = 10;
    s.duration_slots = 100000;
    s.seed = 1;
    s.allocator = "mpc";
    s.classes = {{1e-3, 5.6e8}, {4e-3, 3.6e8}};

    // Asymmetric offered load: two busy ONUs, one light, one carrying class 2
    // only. Busy-ONU bursts (12 + 6 packets/slot) overrun a rigid quarter
    // share of the 47-packet budget, while the pooled worst case (27 + 16)
    // stays inside it.
    const std::vector<int> c1_counts = {1, 1, 1, 0};
    const std::vector<double> c1_peaks = {2.4e8, 2.4e8, 6e7, 6e7};
    const std::vector<int> c2_counts = {3, 3, 1, 1};
    s.class_sources.resize(2);
    s.best_effort_sources.clear();
    for (int o = 0; o < s.n_onus; ++o) {
        s.class_sources[0].push_back(
            source_group(c1_peaks[static_cast<std::size_t>(o)], 0.2, 0.8,
                         c1_counts[static_cast<std::size_t>(o)]));
        s.class_sources[1].push_back(
            source_group(4e7, 0.2, 0.8, c2_counts[static_cast<std::size_t>(o)]));
        s.best_effort_sources.push_back(source_group(3e7, 0.8, 0.5, 2));
    }
    return s;
}

Scenario full_scale_scenario() {
    Scenario s;
    s.n_onus = 16;
    s.distance_km.clear();
    for (int o = 0; o < s.n_onus; ++o)
        s.distance_km.push_back(1.0 + 4.0 * static_cast<double>(o) / 15.0);
    s.link_bps = 1e9;
    s.slot_s = 5e-4;
    s.guard_s = 5e-6;
    s.control_overhead_bits = 1024;
    s.packet_bits = 10000;
    s.onu_buffer_bits = 10000000;
    s.horizon = 10;
    s.duration_slots = 100000;
    s.seed = 1;
    s.allocator = "mpc";
    // 192 class sources against a 40-packet effective budget: the top of the
    // load grid sits just under the capacity threshold
    s.classes = {{1e-3, 1e8}, {4e-3, 1e8}};
    s.class_sources.resize(2);
    for (int o = 0; o < s.n_onus; ++o) {
        s.class_sources[0].push_back(source_group(2e7, 0.2, 0.2, 6));
        s.class_sources[1].push_back(source_group(2e7, 0.2, 0.2, 6));
        s.best_effort_sources.push_back(source_group(2e7, 0.8, 0.15, 4));
    }
    return s;
}

namespace {

void reject_unknown_keys(const json& obj, const std::vector<std::string>& known,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool found = false;
        for (const std::string& k : known)
            if (it.key() == k) { found = true; break; }
        if (!found)
            throw InvalidScenarioError("unknown key '" + it.key() + "' in " + where);
    }
}

std::vector<std::vector<SourceConfig>> parse_source_spec(const json& obj, int n_onus,
                                                         const std::string& where) {
    reject_unknown_keys(obj, {"source_peak_bps", "sources_per_onu", "mean_load", "hurst"}, where);
    const double peak = obj.value("source_peak_bps", 2e7);
    const double mean_load = obj.value("mean_load", 0.5);
    const double hurst = obj.value("hurst", 0.8);
    std::vector<int> counts;
    if (obj.contains("sources_per_onu")) {
        if (obj["sources_per_onu"].is_array()) {
            for (const auto& v : obj["sources_per_onu"]) counts.push_back(v.get<int>());
            if (static_cast<int>(counts.size()) != n_onus)
                throw InvalidScenarioError(where + ": sources_per_onu must list every ONU");
        } else {
            counts.assign(static_cast<std::size_t>(n_onus), obj["sources_per_onu"].get<int>());
        }
    } else {
        counts.assign(static_cast<std::size_t>(n_onus), 1);
    }
    std::vector<std::vector<SourceConfig>> per_onu;
    for (int o = 0; o < n_onus; ++o)
        per_onu.push_back(source_group(peak, hurst, mean_load, counts[static_cast<std::size_t>(o)]));
    return per_onu;
}

Scenario parse_scenario(const json& obj) {
    Scenario s;
    const std::string preset = obj.value("preset", "desk");
    if (preset == "desk")
        s = desk_scenario();
    else if (preset == "full")
        s = full_scale_scenario();
    else
        throw InvalidScenarioError("unknown preset: " + preset);

    reject_unknown_keys(obj,
                        {"preset", "n_onus", "distance_km", "link_bps", "slot_s", "guard_s",
                         "control_overhead_bits", "packet_bits", "onu_buffer_bits", "horizon",
                         "duration_slots", "seed", "allocator", "slice_fraction",
                         "olt_window_fraction", "prediction_noise_variance", "classes",
                         "best_effort", "replay_trace_csv", "export_trace_csv"},
                        "scenario");

    if (obj.contains("n_onus")) s.n_onus = obj["n_onus"].get<int>();
    if (obj.contains("distance_km")) {
        s.distance_km.clear();
        if (obj["distance_km"].is_array())
            for (const auto& v : obj["distance_km"]) s.distance_km.push_back(v.get<double>());
        else
            s.distance_km.assign(static_cast<std::size_t>(s.n_onus), obj["distance_km"].get<double>());
    } else if (static_cast<int>(s.distance_km.size()) != s.n_onus) {
        s.distance_km.assign(static_cast<std::size_t>(s.n_onus), 3.0);
    }
    if (obj.contains("link_bps")) s.link_bps = obj["link_bps"].get<double>();
    if (obj.contains("slot_s")) s.slot_s = obj["slot_s"].get<double>();
    if (obj.contains("guard_s")) s.guard_s = obj["guard_s"].get<double>();
    if (obj.contains("control_overhead_bits"))
        s.control_overhead_bits = obj["control_overhead_bits"].get<std::int64_t>();
    if (obj.contains("packet_bits")) s.packet_bits = obj["packet_bits"].get<std::int64_t>();
    if (obj.contains("onu_buffer_bits")) s.onu_buffer_bits = obj["onu_buffer_bits"].get<std::int64_t>();
    if (obj.contains("horizon")) s.horizon = obj["horizon"].get<int>();
    if (obj.contains("duration_slots")) s.duration_slots = obj["duration_slots"].get<std::int64_t>();
    if (obj.contains("seed")) s.seed = obj["seed"].get<std::uint64_t>();
    if (obj.contains("allocator")) s.allocator = obj["allocator"].get<std::string>();
    if (obj.contains("slice_fraction"))
        s.allocator_params.slice_fraction = obj["slice_fraction"].get<double>();
    if (obj.contains("olt_window_fraction"))
        s.allocator_params.olt_window_fraction = obj["olt_window_fraction"].get<double>();
    if (obj.contains("prediction_noise_variance"))
        s.prediction_noise_variance = obj["prediction_noise_variance"].get<double>();
    if (obj.contains("replay_trace_csv")) s.replay_trace_csv = obj["replay_trace_csv"].get<std::string>();
    if (obj.contains("export_trace_csv")) s.export_trace_csv = obj["export_trace_csv"].get<std::string>();

    if (obj.contains("classes")) {
        s.classes.clear();
        s.class_sources.clear();
        for (const auto& cls : obj["classes"]) {
            reject_unknown_keys(cls,
                                {"deadline_s", "bandwidth_bps", "source_peak_bps",
                                 "sources_per_onu", "mean_load", "hurst"},
                                "class");
            ClassConfig cc;
            cc.deadline_s = cls.at("deadline_s").get<double>();
            cc.bandwidth_bps = cls.at("bandwidth_bps").get<double>();
            s.classes.push_back(cc);
            json sources = cls;
            sources.erase("deadline_s");
            sources.erase("bandwidth_bps");
            s.class_sources.push_back(parse_source_spec(sources, s.n_onus, "class"));
        }
    } else if (obj.contains("n_onus")) {
        throw InvalidScenarioError("custom n_onus requires an explicit classes list");
    }
    if (obj.contains("best_effort")) {
        s.best_effort_sources = parse_source_spec(obj["best_effort"], s.n_onus, "best_effort");
    } else if (static_cast<int>(s.best_effort_sources.size()) != s.n_onus) {
        s.best_effort_sources.assign(static_cast<std::size_t>(s.n_onus),
                                     source_group(2e7, 0.8, 0.5, 2));
    }
    return s;
}

} // namespace

ExperimentSpec parse_experiment_json(const std::string& text) {
    json root = json::parse(text);
    reject_unknown_keys(root, {"scenario", "sweep", "output_dir", "repetitions"}, "experiment");

    ExperimentSpec spec;
    spec.base = root.contains("scenario") ? parse_scenario(root["scenario"]) : desk_scenario();
    if (root.contains("output_dir")) spec.output_dir = root["output_dir"].get<std::string>();
    if (root.contains("repetitions")) spec.repetitions = root["repetitions"].get<int>();
    if (spec.repetitions < 1)
        throw InvalidScenarioError("repetitions must be >= 1");

    if (root.contains("sweep")) {
        const json& sw = root["sweep"];
        reject_unknown_keys(sw,
                            {"load_multipliers", "be_load_multipliers", "allocators", "horizons",
                             "noise_variances", "seeds", "max_points"},
                            "sweep");
        if (sw.contains("load_multipliers")) {
            spec.load_multipliers.clear();
            for (const auto& v : sw["load_multipliers"]) spec.load_multipliers.push_back(v.get<double>());
        }
        if (sw.contains("be_load_multipliers")) {
            spec.be_load_multipliers.clear();
            for (const auto& v : sw["be_load_multipliers"])
                spec.be_load_multipliers.push_back(v.get<double>());
        }
        if (sw.contains("allocators"))
            for (const auto& v : sw["allocators"]) spec.allocators.push_back(v.get<std::string>());
        if (sw.contains("horizons"))
            for (const auto& v : sw["horizons"]) spec.horizons.push_back(v.get<int>());
        if (sw.contains("noise_variances"))
            for (const auto& v : sw["noise_variances"]) spec.noise_variances.push_back(v.get<double>());
        if (sw.contains("seeds"))
            for (const auto& v : sw["seeds"]) spec.seeds.push_back(v.get<std::uint64_t>());
        if (sw.contains("max_points")) spec.max_points = sw["max_points"].get<int>();
    }
    return spec;
}

ExperimentSpec parse_experiment_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidScenarioError("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_experiment_json(ss.str());
}

Scenario materialize(const Scenario& base, const SweepCoords& coords) {
    Scenario s = base;
    s.allocator = coords.allocator;
    s.horizon = coords.horizon;
    s.prediction_noise_variance = coords.noise_variance;
    s.seed = coords.seed;
    for (auto& per_class : s.class_sources)
        for (auto& per_onu : per_class) {
            std::vector<SourceConfig> scaled;
            for (SourceConfig cfg : per_onu) {
                cfg.mean_load = std::min(1.0, cfg.mean_load * coords.load_multiplier);
                if (cfg.mean_load > 0.0) scaled.push_back(cfg);
            }
            per_onu = std::move(scaled);
        }
    for (auto& per_onu : s.best_effort_sources) {
        std::vector<SourceConfig> scaled;
        for (SourceConfig cfg : per_onu) {
            cfg.mean_load = std::min(1.0, cfg.mean_load * coords.be_load_multiplier);
            if (cfg.mean_load > 0.0) scaled.push_back(cfg);
        }
        per_onu = std::move(scaled);
    }
    return s;
}

std::vector<SweepCoords> expand_sweep(const ExperimentSpec& spec) {
    std::vector<std::string> allocators =
        spec.allocators.empty() ? std::vector<std::string>{spec.base.allocator} : spec.allocators;
    std::vector<int> horizons =
        spec.horizons.empty() ? std::vector<int>{spec.base.horizon} : spec.horizons;
    std::vector<double> noise = spec.noise_variances.empty()
                                    ? std::vector<double>{spec.base.prediction_noise_variance}
                                    : spec.noise_variances;
    std::vector<std::uint64_t> seeds = spec.seeds;
    if (seeds.empty())
        for (int r = 0; r < spec.repetitions; ++r)
            seeds.push_back(spec.base.seed + static_cast<std::uint64_t>(r));

    std::vector<SweepCoords> points;
    for (const std::string& alloc : allocators)
        for (double lm : spec.load_multipliers)
            for (double bm : spec.be_load_multipliers)
                for (int h : horizons)
                    for (double nv : noise)
                        for (std::uint64_t seed : seeds)
                            points.push_back({alloc, lm, bm, h, nv, seed});
    if (static_cast<int>(points.size()) > spec.max_points)
        throw InvalidScenarioError("sweep expands to " + std::to_string(points.size()) +
                                   " points, above max_points=" + std::to_string(spec.max_points));
    return points;
}

std::uint64_t hash_scenario(const Scenario& s) {
    std::ostringstream os;
    os << s.n_onus << '|' << s.link_bps << '|' << s.slot_s << '|' << s.guard_s << '|'
       << s.control_overhead_bits << '|' << s.packet_bits << '|' << s.onu_buffer_bits << '|'
       << s.allocator << '|' << s.horizon << '|' << s.prediction_noise_variance << '|'
       << s.duration_slots << '|' << s.seed << '|'
       << s.allocator_params.slice_fraction << '|' << s.allocator_params.olt_window_fraction;
    for (double d : s.distance_km) os << '|' << d;
    for (const ClassConfig& c : s.classes) os << '|' << c.deadline_s << ',' << c.bandwidth_bps;
    for (const auto& per_class : s.class_sources)
        for (const auto& per_onu : per_class)
            for (const SourceConfig& cfg : per_onu)
                os << '|' << cfg.hurst << ',' << cfg.peak_bps << ',' << cfg.mean_load;
    for (const auto& per_onu : s.best_effort_sources)
        for (const SourceConfig& cfg : per_onu)
            os << '|' << cfg.hurst << ',' << cfg.peak_bps << ',' << cfg.mean_load;

    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : os.str()) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string csv_header() {
    return "schema_version,scenario_hash,allocator,horizon,noise_variance,load_multiplier,"
           "be_load_multiplier,seed,class_label,offered_packets,served_packets,"
           "deadline_drop_packets,buffer_drop_packets,residual_packets,violation_pct,"
           "buffer_drop_pct,mean_delay_s,delay_variance_s2,max_delay_s,throughput_pct,"
           "mean_utilization_pct,max_poll_gap_s";
}

void append_csv_rows(std::ostream& os, const SweepCoords& coords,
                     std::uint64_t scenario_hash, const MetricsReport& report) {
    auto row = [&](const ClassMetrics& m) {
        os << kCsvSchemaVersion << ',' << scenario_hash << ',' << coords.allocator << ','
           << coords.horizon << ',' << fmt_double(coords.noise_variance) << ','
           << fmt_double(coords.load_multiplier) << ',' << fmt_double(coords.be_load_multiplier)
           << ',' << coords.seed << ',' << m.label << ',' << m.offered << ',' << m.served << ','
           << m.deadline_drops << ',' << m.buffer_drops << ',' << m.residual << ','
           << fmt_double(m.violation_pct) << ',' << fmt_double(m.buffer_drop_pct) << ','
           << fmt_double(m.mean_delay_s) << ',' << fmt_double(m.delay_variance_s2) << ','
           << fmt_double(m.max_delay_s) << ',' << fmt_double(report.throughput_pct) << ','
           << fmt_double(report.mean_utilization_pct) << ',' << fmt_double(report.max_poll_gap_s)
           << '\n';
    };
    for (const ClassMetrics& m : report.classes) row(m);
    row(report.best_effort);
}

namespace {

unsigned worker_count(std::size_t points) {
    unsigned jobs = std::thread::hardware_concurrency();
    if (jobs == 0) jobs = 1;
    if (const char* env = std::getenv("PONMPC_JOBS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) jobs = static_cast<unsigned>(v);
    }
    if (points < jobs) jobs = static_cast<unsigned>(points);
    return jobs == 0 ? 1 : jobs;
}

json scenario_summary_json(const Scenario& s) {
    json j;
    j["n_onus"] = s.n_onus;
    j["link_bps"] = s.link_bps;
    j["slot_s"] = s.slot_s;
    j["guard_s"] = s.guard_s;
    j["control_overhead_bits"] = s.control_overhead_bits;
    j["packet_bits"] = s.packet_bits;
    j["onu_buffer_bits"] = s.onu_buffer_bits;
    j["allocator"] = s.allocator;
    j["horizon"] = s.horizon;
    j["duration_slots"] = s.duration_slots;
    j["seed"] = s.seed;
    j["classes"] = json::array();
    for (const ClassConfig& c : s.classes)
        j["classes"].push_back({{"deadline_s", c.deadline_s}, {"bandwidth_bps", c.bandwidth_bps}});
    return j;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    validate_scenario(spec.base);
    const std::vector<SweepCoords> points = expand_sweep(spec);

    std::string out_dir = spec.output_dir;
    if (const char* env = std::getenv("PONMPC_OUTPUT_DIR")) out_dir = env;
    std::filesystem::create_directories(out_dir);

    struct Outcome {
        bool ok = false;
        std::uint64_t hash = 0;
        MetricsReport report;
        std::string error;
    };
    std::vector<Outcome> outcomes(points.size());

    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= points.size()) break;
            Outcome& out = outcomes[i];
            try {
                const Scenario s = materialize(spec.base, points[i]);
                out.hash = hash_scenario(s);
                out.report = run(s);
                out.report.scenario_hash = out.hash;
                out.ok = true;
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    };
    const unsigned jobs = worker_count(points.size());
    std::vector<std::thread> workers;
    for (unsigned w = 1; w < jobs; ++w) workers.emplace_back(work);
    work();
    for (std::thread& w : workers) w.join();

    ExperimentResult result;
    result.points = static_cast<int>(points.size());
    result.csv_path = std::filesystem::path(out_dir) / "results.csv";
    result.summary_path = std::filesystem::path(out_dir) / "summary.json";

    std::ofstream csv(result.csv_path, std::ios::binary);
    if (!csv)
        throw Error("cannot write " + result.csv_path.string());
    csv << csv_header() << '\n';
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (outcomes[i].ok)
            append_csv_rows(csv, points[i], outcomes[i].hash, outcomes[i].report);
        else
            result.failures.push_back("point " + std::to_string(i) + " (" + points[i].allocator +
                                      "): " + outcomes[i].error);
    }
    csv.close();

    // aggregates per (allocator, load) pair, averaged over the other axes
    std::map<std::pair<std::string, double>, std::map<std::string, std::pair<double, int>>> agg;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!outcomes[i].ok) continue;
        const auto key = std::make_pair(points[i].allocator, points[i].load_multiplier);
        auto add = [&](const ClassMetrics& m) {
            auto& cell = agg[key][m.label];
            cell.first += m.violation_pct;
            cell.second += 1;
        };
        for (const ClassMetrics& m : outcomes[i].report.classes) add(m);
        add(outcomes[i].report.best_effort);
        auto& tp = agg[key]["throughput"];
        tp.first += outcomes[i].report.throughput_pct;
        tp.second += 1;
    }
    json summary;
    summary["schema_version"] = kCsvSchemaVersion;
    summary["conventions"] = "busy=payload-only;jitter=population-variance";
    summary["generated_at_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch()).count();
    summary["base_scenario"] = scenario_summary_json(spec.base);
    summary["points"] = result.points;
    summary["failures"] = result.failures;
    summary["aggregates"] = json::array();
    for (const auto& [key, cells] : agg) {
        json entry;
        entry["allocator"] = key.first;
        entry["load_multiplier"] = key.second;
        for (const auto& [label, cell] : cells)
            entry[label == "throughput" ? "mean_throughput_pct" : "mean_violation_pct_" + label] =
                cell.first / cell.second;
        summary["aggregates"].push_back(entry);
    }
    std::ofstream js(result.summary_path, std::ios::binary);
    js << summary.dump(2) << '\n';
    return result;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

std::vector<std::filesystem::path> emit_plot_data(const std::string& csv_path,
                                                  const std::string& metric,
                                                  const std::string& group_by,
                                                  const std::string& out_dir) {
    std::ifstream in(csv_path);
    if (!in)
        throw Error("cannot open " + csv_path);
    std::string line;
    if (!std::getline(in, line))
        throw Error("empty csv: " + csv_path);
    const std::vector<std::string> header = split_csv_line(line);
    auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int metric_col = column(metric);
    if (metric_col < 0)
        throw UnknownMetricError("metric column not found: " + metric);
    const int group_col = column(group_by);
    if (group_col < 0)
        throw UnknownMetricError("group-by column not found: " + group_by);
    const int x_col = column("load_multiplier");

    // group -> x -> (sum, count)
    std::map<std::string, std::map<double, std::pair<double, int>>> curves;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) <= std::max(metric_col, std::max(group_col, x_col)))
            throw Error("short csv row: " + line);
        auto& cell = curves[fields[static_cast<std::size_t>(group_col)]]
                           [std::stod(fields[static_cast<std::size_t>(x_col)])];
        cell.first += std::stod(fields[static_cast<std::size_t>(metric_col)]);
        cell.second += 1;
        ++rows;
    }
    if (rows == 0)
        throw Error("csv has no data rows: " + csv_path);

    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> paths;
    for (const auto& [group, xs] : curves) {
        std::string safe = group;
        for (char& ch : safe)
            if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '-') ch = '_';
        const std::filesystem::path p =
            std::filesystem::path(out_dir) / (metric + "__" + group_by + "-" + safe + ".dat");
        std::ofstream os(p, std::ios::binary);
        for (const auto& [x, cell] : xs)
            os << fmt_double(x) << ' ' << fmt_double(cell.first / cell.second) << '\n';
        paths.push_back(p);
    }
    return paths;
}

} // namespace ponmpc
