#include "ponmpc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "ponmpc/errors.hpp"
#include "ponmpc/rng.hpp"

namespace ponmpc {

std::int64_t effective_lambda(const SlotConfig& slot_cfg, int n_onus, double guard_s,
                              std::int64_t control_overhead_bits) {
    const double usable_s = slot_cfg.slot_s - static_cast<double>(n_onus) * guard_s;
    if (usable_s <= 0.0)
        throw SlotTooShortError("guard intervals consume the whole slot");
    const double usable_bits =
        slot_cfg.link_bps * usable_s - static_cast<double>(n_onus * control_overhead_bits);
    if (usable_bits < 0.0)
        throw SlotTooShortError("control overhead consumes the whole slot");
    return static_cast<std::int64_t>(
        std::floor(usable_bits / static_cast<double>(slot_cfg.packet_bits) + 1e-9));
}

void validate_scenario(const Scenario& s) {
    if (s.n_onus < 1)
        throw InvalidScenarioError("n_onus must be >= 1");
    if (s.duration_slots < 0)
        throw InvalidScenarioError("duration_slots must be >= 0");
    if (static_cast<int>(s.distance_km.size()) != s.n_onus)
        throw InvalidScenarioError("distance_km must list one distance per ONU");
    if (s.classes.empty())
        throw InvalidScenarioError("at least one traffic class is required");
    if (!is_known_allocator(s.allocator))
        throw InvalidScenarioError("unknown allocator: " + s.allocator);
    if (s.horizon < 0)
        throw InvalidScenarioError("horizon must be >= 0");
    if (s.prediction_noise_variance < 0.0)
        throw InvalidScenarioError("prediction noise variance must be >= 0");
    if (s.onu_buffer_bits < s.packet_bits)
        throw InvalidScenarioError("buffer smaller than one packet");

    double max_rtt = 0.0;
    for (double d : s.distance_km)
        max_rtt = std::max(max_rtt, 2.0 * d * kFiberDelayPerKm);
    if (s.slot_s < max_rtt)
        throw InvalidScenarioError("slot_s shorter than the maximum round trip time");

    double min_deadline = s.classes.front().deadline_s;
    for (const ClassConfig& c : s.classes) min_deadline = std::min(min_deadline, c.deadline_s);
    if (s.slot_s > min_deadline / 2.0 + 1e-12)
        throw InvalidScenarioError("slot_s exceeds half the tightest deadline");

    if (s.class_sources.size() != s.classes.size())
        throw InvalidScenarioError("class_sources must match the class list");
    for (const auto& per_onu : s.class_sources)
        if (static_cast<int>(per_onu.size()) != s.n_onus)
            throw InvalidScenarioError("class_sources must list every ONU");
    if (static_cast<int>(s.best_effort_sources.size()) != s.n_onus)
        throw InvalidScenarioError("best_effort_sources must list every ONU");

    SlotConfig raw = make_slot_config(s.slot_s, s.link_bps, s.packet_bits, s.horizon);
    const std::int64_t lam = effective_lambda(raw, s.n_onus, s.guard_s, s.control_overhead_bits);
    if (lam <= 0)
        throw InvalidScenarioError("effective per-slot budget is zero");
    for (const ClassConfig& c : s.classes)
        compute_k(c.deadline_s, s.slot_s);  // throws when infeasible
}

namespace {

struct WindowSlot {
    // [onu][cls] admitted-agnostic raw arrival times for the slot
    std::vector<std::vector<std::vector<double>>> cls_times;
    std::vector<std::vector<double>> be_times;
};

struct OnuState {
    std::vector<VirtualQueueBank> banks;
    std::vector<std::deque<double>> aged;    // per class, arrival times
    std::vector<std::vector<double>> fresh;  // per class, this slot's admissions
    std::deque<double> be_aged;
    std::vector<double> be_fresh;
    std::vector<std::vector<OnOffSource>> cls_sources;  // [cls][i]
    std::vector<OnOffSource> be_sources;
    double last_poll_s = 0.0;

    std::int64_t buffered_packets() const {
        std::int64_t n = static_cast<std::int64_t>(be_aged.size() + be_fresh.size());
        for (const auto& d : aged) n += static_cast<std::int64_t>(d.size());
        for (const auto& f : fresh) n += static_cast<std::int64_t>(f.size());
        return n;
    }
};

} // namespace

struct Simulation::Impl {
    Scenario sc;
    SlotConfig eff_cfg;
    std::vector<TrafficClassSpec> specs;
    std::vector<OnuState> onus;
    std::deque<WindowSlot> window;  // slots [slot, slot + generated)
    std::int64_t window_base = 0;
    std::int64_t slot = 0;
    Rng noise_rng;
    RunCounters counters;
    bool finished = false;
    ArrivalTrace replay;      // counts when replaying
    bool replaying = false;
    ArrivalTrace exported;    // counts accumulated for export
    double pkt_time;
    std::int64_t buffer_capacity_pkts;

    explicit Impl(Scenario scenario)
        : sc(std::move(scenario)),
          noise_rng(derive_seed(sc.seed, 0x4e6f697365ULL)) {
        validate_scenario(sc);
        eff_cfg = make_slot_config(sc.slot_s, sc.link_bps, sc.packet_bits, sc.horizon);
        eff_cfg.lambda_packets = effective_lambda(eff_cfg, sc.n_onus, sc.guard_s,
                                                  sc.control_overhead_bits);
        for (std::size_t c = 0; c < sc.classes.size(); ++c)
            specs.push_back(make_traffic_class_spec(static_cast<int>(c) + 1,
                                                    sc.classes[c].deadline_s,
                                                    sc.classes[c].bandwidth_bps, eff_cfg));
        pkt_time = static_cast<double>(sc.packet_bits) / sc.link_bps;
        buffer_capacity_pkts = sc.onu_buffer_bits / sc.packet_bits;

        onus.resize(static_cast<std::size_t>(sc.n_onus));
        for (int o = 0; o < sc.n_onus; ++o) {
            OnuState& st = onus[static_cast<std::size_t>(o)];
            st.banks.reserve(specs.size());
            for (const TrafficClassSpec& spec : specs)
                st.banks.push_back(VirtualQueueBank::zeros(spec.k_slots));
            st.aged.resize(specs.size());
            st.fresh.resize(specs.size());
            st.cls_sources.resize(specs.size());
            for (std::size_t c = 0; c < specs.size(); ++c) {
                const auto& cfgs = sc.class_sources[c][static_cast<std::size_t>(o)];
                for (std::size_t i = 0; i < cfgs.size(); ++i) {
                    SourceConfig cfg = cfgs[i];
                    cfg.packet_bits = sc.packet_bits;
                    cfg.seed = derive_seed(sc.seed, static_cast<std::uint64_t>(o), c + 1, i);
                    st.cls_sources[c].emplace_back(cfg);
                }
            }
            const auto& be_cfgs = sc.best_effort_sources[static_cast<std::size_t>(o)];
            for (std::size_t i = 0; i < be_cfgs.size(); ++i) {
                SourceConfig cfg = be_cfgs[i];
                cfg.packet_bits = sc.packet_bits;
                cfg.seed = derive_seed(sc.seed, static_cast<std::uint64_t>(o), 0, i);
                st.be_sources.emplace_back(cfg);
            }
        }

        counters.classes.resize(specs.size());

        if (!sc.replay_trace_csv.empty()) {
            std::ifstream in(sc.replay_trace_csv);
            if (!in)
                throw InvalidScenarioError("cannot open replay trace: " + sc.replay_trace_csv);
            replay = read_trace_csv(in, sc.n_onus, static_cast<int>(specs.size()));
            replaying = true;
        }
    }

    // -- traffic window ------------------------------------------------------

    void generate_window_slot(std::int64_t s) {
        WindowSlot ws;
        ws.cls_times.assign(static_cast<std::size_t>(sc.n_onus),
                            std::vector<std::vector<double>>(specs.size()));
        ws.be_times.resize(static_cast<std::size_t>(sc.n_onus));
        const double t0 = static_cast<double>(s) * sc.slot_s;
        for (int o = 0; o < sc.n_onus; ++o) {
            OnuState& st = onus[static_cast<std::size_t>(o)];
            for (std::size_t c = 0; c < specs.size(); ++c) {
                auto& times = ws.cls_times[static_cast<std::size_t>(o)][c];
                if (replaying) {
                    std::int64_t count = 0;
                    if (s < replay.slots())
                        count = replay.counts[static_cast<std::size_t>(s)]
                                             [static_cast<std::size_t>(o)][c];
                    for (std::int64_t k = 0; k < count; ++k)
                        times.push_back(t0 + (static_cast<double>(k) + 0.5) * sc.slot_s /
                                                 static_cast<double>(count));
                } else {
                    for (OnOffSource& src : st.cls_sources[c])
                        src.generate(t0, sc.slot_s, &times);
                    std::sort(times.begin(), times.end());
                }
            }
            auto& be = ws.be_times[static_cast<std::size_t>(o)];
            for (OnOffSource& src : st.be_sources)
                src.generate(t0, sc.slot_s, &be);
            std::sort(be.begin(), be.end());
        }
        if (!sc.export_trace_csv.empty() && s < sc.duration_slots) {
            if (exported.slots() <= s)
                exported.counts.resize(static_cast<std::size_t>(s + 1),
                                       std::vector<std::vector<std::int64_t>>(
                                           static_cast<std::size_t>(sc.n_onus),
                                           std::vector<std::int64_t>(specs.size(), 0)));
            for (int o = 0; o < sc.n_onus; ++o)
                for (std::size_t c = 0; c < specs.size(); ++c)
                    exported.counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(o)][c] =
                        static_cast<std::int64_t>(ws.cls_times[static_cast<std::size_t>(o)][c].size());
        }
        window.push_back(std::move(ws));
    }

    void ensure_window_through(std::int64_t s) {
        while (window_base + static_cast<std::int64_t>(window.size()) <= s)
            generate_window_slot(window_base + static_cast<std::int64_t>(window.size()));
    }

    const WindowSlot& window_at(std::int64_t s) {
        ensure_window_through(s);
        return window[static_cast<std::size_t>(s - window_base)];
    }

    // -- one slot ------------------------------------------------------------

    void step() {
        if (finished)
            throw InternalError("step() after finish()");
        const std::int64_t t = slot;
        ensure_window_through(t + sc.horizon);

        // (1) arrivals for slot t: admission against the ONU buffer
        admit_arrivals(t);

        // (2) queue status as of the slot boundary (fresh arrivals excluded)
        std::vector<OnuReport> reports(static_cast<std::size_t>(sc.n_onus));
        for (int o = 0; o < sc.n_onus; ++o) {
            reports[static_cast<std::size_t>(o)].onu_id = o;
            reports[static_cast<std::size_t>(o)].banks = onus[static_cast<std::size_t>(o)].banks;
            reports[static_cast<std::size_t>(o)].best_effort_backlog =
                static_cast<std::int64_t>(onus[static_cast<std::size_t>(o)].be_aged.size());
        }

        // (3) grants
        const GrantSchedule schedule = allocate_by_name(
            sc.allocator, reports, specs, eff_cfg, make_predictions(t), sc.allocator_params);
        check_schedule(schedule, reports);

        // (4)+(5) transmission timeline and departures
        serve(t, schedule);

        // (6) state evolution; expired packets leave as deadline drops
        advance();

        ++slot;
        ++counters.slots;
        window.pop_front();
        ++window_base;
    }

    void admit_arrivals(std::int64_t t) {
        const WindowSlot& ws = window_at(t);
        for (int o = 0; o < sc.n_onus; ++o) {
            OnuState& st = onus[static_cast<std::size_t>(o)];
            std::int64_t used = st.buffered_packets();
            for (std::size_t c = 0; c < specs.size(); ++c) {
                for (double ts : ws.cls_times[static_cast<std::size_t>(o)][c]) {
                    ++counters.classes[c].offered;
                    if (used < buffer_capacity_pkts) {
                        st.fresh[c].push_back(ts);
                        ++used;
                    } else {
                        ++counters.classes[c].buffer_drops;
                    }
                }
            }
            for (double ts : ws.be_times[static_cast<std::size_t>(o)]) {
                ++counters.best_effort.offered;
                if (used < buffer_capacity_pkts) {
                    st.be_fresh.push_back(ts);
                    ++used;
                } else {
                    ++counters.best_effort.buffer_drops;
                }
            }
        }
    }

    std::vector<std::vector<std::int64_t>> make_predictions(std::int64_t t) {
        std::vector<std::vector<std::int64_t>> pred(specs.size(),
                                                    std::vector<std::int64_t>(
                                                        static_cast<std::size_t>(sc.horizon), 0));
        if (sc.allocator != "mpc" || sc.horizon == 0) return pred;
        const double sigma = std::sqrt(sc.prediction_noise_variance);
        for (int h = 0; h < sc.horizon; ++h) {
            const WindowSlot& ws = window_at(t + h);
            for (std::size_t c = 0; c < specs.size(); ++c) {
                std::int64_t agg = 0;
                for (int o = 0; o < sc.n_onus; ++o)
                    agg += static_cast<std::int64_t>(
                        ws.cls_times[static_cast<std::size_t>(o)][c].size());
                if (sigma > 0.0) {
                    const double noisy =
                        static_cast<double>(agg) + sigma * noise_rng.gaussian();
                    agg = static_cast<std::int64_t>(std::llround(std::max(0.0, noisy)));
                }
                pred[c][static_cast<std::size_t>(h)] = agg;
            }
        }
        return pred;
    }

    void check_schedule(const GrantSchedule& gs, const std::vector<OnuReport>& reports) {
        if (gs.onus.empty()) {
            if (sc.n_onus != 0)
                throw InternalError("allocator returned empty schedule");
            return;
        }
        if (gs.fog_total() > eff_cfg.lambda_packets)
            throw InternalError("allocator exceeded the fog slot budget");
        if (gs.olt_total() > eff_cfg.lambda_packets)
            throw InternalError("allocator exceeded the overlay slot budget");
        for (int o = 0; o < sc.n_onus; ++o) {
            const OnuGrant& g = gs.onus[static_cast<std::size_t>(o)];
            const OnuReport& r = reports[static_cast<std::size_t>(o)];
            for (std::size_t c = 0; c < specs.size(); ++c) {
                for (int i = 0; i < r.banks[c].k(); ++i) {
                    std::int64_t granted = g.class_queue[c][static_cast<std::size_t>(i)];
                    if (!g.olt_class_queue.empty())
                        granted += g.olt_class_queue[c][static_cast<std::size_t>(i)];
                    if (granted > r.banks[c].q[static_cast<std::size_t>(i)])
                        throw InternalError("grant exceeds reported backlog");
                }
            }
            std::int64_t be = g.best_effort + g.olt_best_effort;
            if (be > r.best_effort_backlog)
                throw InternalError("best-effort grant exceeds reported backlog");
        }
    }

    // Departure times follow the intra-slot burst layout: ONUs in ascending id
    // order, each burst opening with guard + control, packets back to back.
    void serve(std::int64_t t, const GrantSchedule& gs) {
        const double slot_start = static_cast<double>(t) * sc.slot_s;
        const double ctrl_time = static_cast<double>(sc.control_overhead_bits) / sc.link_bps;
        double cursor = slot_start;
        double overlay_cursor = slot_start;
        double payload_bits_this_slot = 0.0;

        for (int o = 0; o < sc.n_onus; ++o) {
            OnuState& st = onus[static_cast<std::size_t>(o)];
            const OnuGrant& g = gs.onus[static_cast<std::size_t>(o)];

            const double poll_time = cursor;
            const double gap = poll_time - st.last_poll_s;
            if (t > 0 && gap > counters.max_poll_gap_s) counters.max_poll_gap_s = gap;
            st.last_poll_s = poll_time;

            cursor += sc.guard_s + ctrl_time;

            // fog link: urgent queues first, class order within a deadline
            int kmax = 0;
            for (std::size_t c = 0; c < specs.size(); ++c) kmax = std::max(kmax, specs[c].k_slots);
            std::vector<std::vector<std::int64_t>> taken(specs.size());
            for (std::size_t c = 0; c < specs.size(); ++c)
                taken[c].assign(static_cast<std::size_t>(specs[c].k_slots), 0);

            auto depart_from_queue = [&](std::size_t c, int i, std::int64_t n, double& cur,
                                         bool count_payload) {
                // segment i of the aged ledger = indices [sum(q[0..i-2]) + taken, ...)
                std::int64_t seg_start = 0;
                for (int j = 0; j < i - 1; ++j)
                    seg_start += st.banks[c].q[static_cast<std::size_t>(j)];
                for (std::int64_t k = 0; k < n; ++k) {
                    const double arrival =
                        st.aged[c][static_cast<std::size_t>(seg_start + taken[c][static_cast<std::size_t>(i - 1)] + k)];
                    cur += pkt_time;
                    const double delay = cur - arrival;
                    if (delay > sc.classes[c].deadline_s + 1e-9)
                        throw InternalError("served packet missed its deadline");
                    counters.classes[c].delay.add(delay);
                    ++counters.classes[c].served;
                    if (count_payload) payload_bits_this_slot += static_cast<double>(sc.packet_bits);
                }
                taken[c][static_cast<std::size_t>(i - 1)] += n;
            };

            for (int i = 1; i <= kmax; ++i)
                for (std::size_t c = 0; c < specs.size(); ++c) {
                    if (i > specs[c].k_slots) continue;
                    const std::int64_t n = g.class_queue[c][static_cast<std::size_t>(i - 1)];
                    if (n > 0) depart_from_queue(c, i, n, cursor, true);
                }
            for (std::int64_t k = 0; k < g.best_effort; ++k) {
                const double arrival = st.be_aged.front();
                st.be_aged.pop_front();
                cursor += pkt_time;
                counters.best_effort.delay.add(cursor - arrival);
                ++counters.best_effort.served;
                payload_bits_this_slot += static_cast<double>(sc.packet_bits);
            }

            // overlay wavelength (out-of-band baseline): fixed windows, not
            // counted as fog-link payload
            if (!g.olt_class_queue.empty() || g.olt_best_effort > 0) {
                overlay_cursor = slot_start + static_cast<double>(o) * sc.slot_s /
                                                  static_cast<double>(sc.n_onus);
                overlay_cursor += sc.guard_s + ctrl_time;
                for (int i = 1; i <= kmax; ++i)
                    for (std::size_t c = 0; c < specs.size(); ++c) {
                        if (g.olt_class_queue.empty() || i > specs[c].k_slots) continue;
                        const std::int64_t n = g.olt_class_queue[c][static_cast<std::size_t>(i - 1)];
                        if (n > 0) depart_from_queue(c, i, n, overlay_cursor, false);
                    }
                for (std::int64_t k = 0; k < g.olt_best_effort; ++k) {
                    const double arrival = st.be_aged.front();
                    st.be_aged.pop_front();
                    overlay_cursor += pkt_time;
                    counters.best_effort.delay.add(overlay_cursor - arrival);
                    ++counters.best_effort.served;
                }
            }

            // record which packets left, for the ledger rebuild in advance()
            taken_by_onu.push_back(std::move(taken));
        }

        if (cursor > slot_start + sc.slot_s + 1e-12)
            throw InternalError("transmission timeline overflows the slot");
        counters.payload_bits += payload_bits_this_slot;
        counters.utilization.push_back(static_cast<float>(
            payload_bits_this_slot / (sc.link_bps * sc.slot_s)));
    }

    void advance() {
        for (int o = 0; o < sc.n_onus; ++o) {
            OnuState& st = onus[static_cast<std::size_t>(o)];
            const auto& taken = taken_by_onu[static_cast<std::size_t>(o)];
            for (std::size_t c = 0; c < specs.size(); ++c) {
                const VirtualQueueBank before = st.banks[c];
                const AdvanceResult res = advance_slot(
                    before, taken[c], static_cast<std::int64_t>(st.fresh[c].size()));
                counters.classes[c].deadline_drops += res.violated;

                // rebuild the aged ledger to mirror the bank transition
                std::deque<double> next;
                std::size_t idx = 0;
                for (int i = 1; i <= before.k(); ++i) {
                    const std::int64_t qi = before.q[static_cast<std::size_t>(i - 1)];
                    const std::int64_t xi = taken[c][static_cast<std::size_t>(i - 1)];
                    idx += static_cast<std::size_t>(xi);  // departed
                    if (i == 1) {
                        idx += static_cast<std::size_t>(qi - xi);  // expired
                    } else {
                        for (std::int64_t k = xi; k < qi; ++k)
                            next.push_back(st.aged[c][idx++]);
                    }
                }
                for (double ts : st.fresh[c]) next.push_back(ts);
                st.fresh[c].clear();
                st.aged[c] = std::move(next);
                st.banks[c] = res.bank;
                if (static_cast<std::int64_t>(st.aged[c].size()) != st.banks[c].total())
                    throw InternalError("ledger and bank diverged");
            }
            for (double ts : st.be_fresh) st.be_aged.push_back(ts);
            st.be_fresh.clear();
        }
        taken_by_onu.clear();
    }

    MetricsReport finish() {
        if (finished)
            throw InternalError("finish() called twice");
        finished = true;
        for (std::size_t c = 0; c < specs.size(); ++c) {
            std::int64_t residual = 0;
            for (const OnuState& st : onus) residual += st.banks[c].total();
            counters.classes[c].residual = residual;
        }
        std::int64_t be_residual = 0;
        for (const OnuState& st : onus)
            be_residual += static_cast<std::int64_t>(st.be_aged.size());
        counters.best_effort.residual = be_residual;

        if (!sc.export_trace_csv.empty()) {
            std::ofstream out(sc.export_trace_csv);
            if (!out)
                throw InvalidScenarioError("cannot write trace: " + sc.export_trace_csv);
            write_trace_csv(out, exported);
        }

        MetricsContext ctx;
        ctx.link_bps = sc.link_bps;
        ctx.slot_s = sc.slot_s;
        ctx.duration_slots = counters.slots;
        ctx.seed = sc.seed;
        MetricsReport report = finalize(counters, ctx);
        if (!report.conservation_holds())
            throw InternalError("packet conservation violated");
        return report;
    }

    std::vector<std::vector<std::vector<std::int64_t>>> taken_by_onu;  // per class, per queue
};

Simulation::Simulation(Scenario scenario) : impl_(std::make_unique<Impl>(std::move(scenario))) {}
Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

void Simulation::step() { impl_->step(); }
MetricsReport Simulation::finish() { return impl_->finish(); }

MetricsReport Simulation::run_to_end() {
    while (impl_->slot < impl_->sc.duration_slots) impl_->step();
    return impl_->finish();
}

std::int64_t Simulation::current_slot() const { return impl_->slot; }
const SlotConfig& Simulation::effective_slot_config() const { return impl_->eff_cfg; }
const std::vector<TrafficClassSpec>& Simulation::class_specs() const { return impl_->specs; }

std::int64_t Simulation::bank_level(int onu, int cls, int queue) const {
    return impl_->onus[static_cast<std::size_t>(onu)]
        .banks[static_cast<std::size_t>(cls)].q[static_cast<std::size_t>(queue - 1)];
}

std::int64_t Simulation::ledger_size(int onu, int cls) const {
    return static_cast<std::int64_t>(
        impl_->onus[static_cast<std::size_t>(onu)].aged[static_cast<std::size_t>(cls)].size());
}

MetricsReport run(const Scenario& scenario) {
    Simulation sim(scenario);
    return sim.run_to_end();
}

} // namespace ponmpc
