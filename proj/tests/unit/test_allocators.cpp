#include <doctest.h>

#include <numeric>

#include "ponmpc/allocators.hpp"
#include "ponmpc/errors.hpp"
#include "ponmpc/rng.hpp"

using namespace ponmpc;

namespace {

SlotConfig slot_cfg(std::int64_t lambda, int horizon = 0) {
    SlotConfig cfg;
    cfg.slot_s = 0.5e-3;
    cfg.link_bps = 1e9;
    cfg.packet_bits = 10000;
    cfg.lambda_packets = lambda;
    cfg.horizon = horizon;
    return cfg;
}

TrafficClassSpec cls(int id, int k, std::int64_t lambda_c, double bandwidth_bps = 1e8) {
    TrafficClassSpec spec;
    spec.id = id;
    spec.k_slots = k;
    spec.deadline_s = (k + 1) * 0.5e-3;
    spec.bandwidth_bps = bandwidth_bps;
    spec.lambda_c_packets = lambda_c;
    return spec;
}

OnuReport report(int id, std::vector<VirtualQueueBank> banks, std::int64_t be = 0) {
    return {id, std::move(banks), be};
}

// independent route to integer max-min fairness: hand single packets to the
// requester with the smallest grant so far, lowest id first
std::vector<std::int64_t> greedy_fair_oracle(std::int64_t total,
                                             const std::vector<std::int64_t>& requests) {
    std::vector<std::int64_t> grants(requests.size(), 0);
    std::int64_t budget = total;
    while (budget > 0) {
        int pick = -1;
        for (std::size_t i = 0; i < requests.size(); ++i) {
            if (grants[i] >= requests[i]) continue;
            if (pick < 0 || grants[i] < grants[static_cast<std::size_t>(pick)]) pick = static_cast<int>(i);
        }
        if (pick < 0) break;
        ++grants[static_cast<std::size_t>(pick)];
        --budget;
    }
    return grants;
}

std::int64_t class_total(const GrantSchedule& gs, std::size_t c) {
    std::int64_t total = 0;
    for (const OnuGrant& g : gs.onus)
        total = std::accumulate(g.class_queue[c].begin(), g.class_queue[c].end(), total);
    return total;
}

} // namespace

TEST_CASE("water filling splits the documented examples") {
    CHECK(max_min_fair_distribute(10, {2, 5, 8}) == std::vector<std::int64_t>{2, 4, 4});
    CHECK(max_min_fair_distribute(20, {2, 5, 8}) == std::vector<std::int64_t>{2, 5, 8});
    CHECK(max_min_fair_distribute(7, {5, 5}) == std::vector<std::int64_t>{4, 3});
    CHECK(max_min_fair_distribute(0, {3, 3}) == std::vector<std::int64_t>{0, 0});
    CHECK(max_min_fair_distribute(5, {}).empty());
    CHECK_THROWS_AS(max_min_fair_distribute(-1, {1}), Error);
    CHECK_THROWS_AS(max_min_fair_distribute(1, {-1}), Error);
}

TEST_CASE("water filling matches the greedy oracle") {
    Rng rng(88);
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(1, 5));
        std::vector<std::int64_t> requests(static_cast<std::size_t>(n));
        for (auto& r : requests) r = rng.uniform_int(0, 10);
        const std::int64_t total = rng.uniform_int(0, 20);
        CHECK(max_min_fair_distribute(total, requests) == greedy_fair_oracle(total, requests));
    }
}

TEST_CASE("single onu receives the whole aggregate allocation") {
    const std::vector<TrafficClassSpec> specs{cls(1, 2, 50)};
    const std::vector<OnuReport> reports{report(0, {{{3, 6}}})};
    const GrantSchedule gs = myopic_allocate(reports, specs, slot_cfg(20));
    CHECK(gs.onus[0].class_queue[0][0] == 3);
    CHECK(gs.onus[0].class_queue[0][1] == 6);
}

TEST_CASE("identical onus split grants evenly") {
    const std::vector<TrafficClassSpec> specs{cls(1, 2, 50)};
    const std::vector<OnuReport> reports{report(0, {{{2, 4}}}), report(1, {{{2, 4}}})};
    const GrantSchedule gs = myopic_allocate(reports, specs, slot_cfg(50));
    CHECK(gs.onus[0].class_queue[0] == gs.onus[1].class_queue[0]);
}

TEST_CASE("empty report list yields an empty schedule") {
    const std::vector<TrafficClassSpec> specs{cls(1, 2, 50)};
    CHECK(myopic_allocate({}, specs, slot_cfg(50)).onus.empty());
    CHECK(mpc_allocate({}, specs, slot_cfg(50), {{}}).onus.empty());
}

TEST_CASE("saturated class takes the whole slot budget") {
    const std::vector<TrafficClassSpec> specs{cls(1, 3, 500)};
    const std::vector<OnuReport> reports{report(0, {{{4, 40, 40}}})};
    const GrantSchedule gs = myopic_allocate(reports, specs, slot_cfg(30));
    CHECK(gs.fog_total() == 30);
}

TEST_CASE("mpc with zero horizon matches the myopic allocator") {
    Rng rng(909);
    for (int trial = 0; trial < 60; ++trial) {
        const int n_onus = static_cast<int>(rng.uniform_int(1, 4));
        const int ncls = static_cast<int>(rng.uniform_int(1, 3));
        std::vector<TrafficClassSpec> specs;
        for (int c = 0; c < ncls; ++c)
            specs.push_back(cls(c + 1, static_cast<int>(rng.uniform_int(1, 4)),
                                rng.uniform_int(0, 25)));
        std::vector<OnuReport> reports;
        for (int o = 0; o < n_onus; ++o) {
            std::vector<VirtualQueueBank> banks;
            for (int c = 0; c < ncls; ++c) {
                VirtualQueueBank bank = VirtualQueueBank::zeros(specs[static_cast<std::size_t>(c)].k_slots);
                for (auto& q : bank.q) q = rng.uniform_int(0, 6);
                banks.push_back(std::move(bank));
            }
            reports.push_back(report(o, std::move(banks), rng.uniform_int(0, 10)));
        }
        const SlotConfig cfg = slot_cfg(rng.uniform_int(0, 30));
        const GrantSchedule myopic = myopic_allocate(reports, specs, cfg);
        const GrantSchedule mpc = mpc_allocate(reports, specs, cfg,
                                               std::vector<std::vector<std::int64_t>>(
                                                   static_cast<std::size_t>(ncls)));
        for (std::size_t c = 0; c < specs.size(); ++c)
            CHECK(class_total(myopic, c) == class_total(mpc, c));
    }
}

TEST_CASE("fixed tdm wastes unused shares") {
    const std::vector<TrafficClassSpec> specs{cls(1, 1, 50)};
    // 16 onus, lambda 50 -> 3 packets each, 2 stranded
    std::vector<OnuReport> reports;
    for (int o = 0; o < 16; ++o) reports.push_back(report(o, {{{10}}}));
    const GrantSchedule gs = fixed_tdm_allocate(reports, slot_cfg(50), 16);
    for (const OnuGrant& g : gs.onus) CHECK(g.class_queue[0][0] == 3);
    CHECK(gs.fog_total() == 48);

    // a busy neighbor cannot take an idle onu's share
    std::vector<OnuReport> skew{report(0, {{{40}}}), report(1, {{{0}}})};
    const GrantSchedule gs2 = fixed_tdm_allocate(skew, slot_cfg(20), 2);
    CHECK(gs2.onus[0].class_queue[0][0] == 10);
    CHECK(gs2.onus[1].class_queue[0][0] == 0);

    // one onu owns the full budget
    const GrantSchedule gs3 = fixed_tdm_allocate({report(0, {{{40}}})}, slot_cfg(20), 1);
    CHECK(gs3.onus[0].class_queue[0][0] == 20);
}

TEST_CASE("fixed tdm serves the earliest deadline first") {
    const std::vector<OnuReport> reports{report(0, {{{5, 0, 9}}, {{3, 2}}})};
    const GrantSchedule gs = fixed_tdm_allocate(reports, slot_cfg(10), 1);
    CHECK(gs.onus[0].class_queue[0][0] == 5);  // deadline position 1, class 1
    CHECK(gs.onus[0].class_queue[1][0] == 3);  // deadline position 1, class 2
    CHECK(gs.onus[0].class_queue[1][1] == 2);  // position 2
    CHECK(gs.onus[0].class_queue[0][2] == 0);  // budget exhausted at position 3
}

TEST_CASE("assured serves its budget and spills excess into leftover") {
    // assured budget for 1e8 bps at 0.5 ms and 10 kb packets = 5 per slot
    const std::vector<TrafficClassSpec> specs{cls(1, 1, 50, 1e8)};

    // backlog below the budget: fully served in phase 1
    const GrantSchedule below =
        assured_allocate({report(0, {{{2}}}), report(1, {{{1}}})}, specs, slot_cfg(40));
    CHECK(below.fog_total() == 3);

    // backlog at twice the budget with free capacity: excess served from leftover
    const GrantSchedule twice =
        assured_allocate({report(0, {{{4}}}), report(1, {{{3}}}), report(2, {{{3}}})},
                         specs, slot_cfg(40));
    CHECK(twice.fog_total() == 10);

    // no leftover: exactly the budget is served
    const std::vector<TrafficClassSpec> two{cls(1, 1, 50, 1e8), cls(2, 1, 50, 7e8)};
    const GrantSchedule tight = assured_allocate(
        {report(0, {{{9}}, {{40}}}), report(1, {{{9}}, {{40}}})}, two, slot_cfg(40));
    CHECK(class_total(tight, 0) == 5);   // class 1 capped at its assured rate...
    CHECK(class_total(tight, 1) == 35);  // ...the rest saturates the slot
    CHECK(tight.fog_total() == 40);
}

TEST_CASE("priority slicing reserves and spills") {
    const std::vector<TrafficClassSpec> specs{cls(1, 1, 90), cls(2, 2, 90)};

    // slice 1.0: strict priority over the whole link
    const GrantSchedule whole = priority_allocate(
        {report(0, {{{30}}, {{0, 20}}}, 10)}, specs, slot_cfg(40), 1.0);
    CHECK(whole.onus[0].class_queue[0][0] == 30);
    CHECK(class_total(whole, 1) == 10);
    CHECK(whole.onus[0].best_effort == 0);

    // slice 0.0: delay classes starved, best effort takes everything
    const GrantSchedule starved = priority_allocate(
        {report(0, {{{30}}, {{0, 20}}}, 10)}, specs, slot_cfg(40), 0.0);
    CHECK(starved.fog_total() == 10);
    CHECK(class_total(starved, 0) == 0);

    // class 1 demand beyond the slice with an empty class 2: class 1 takes it all
    const GrantSchedule hog = priority_allocate(
        {report(0, {{{30}}, {{0, 0}}}, 0)}, specs, slot_cfg(40), 0.5);
    CHECK(hog.onus[0].class_queue[0][0] == 20);
    CHECK(class_total(hog, 1) == 0);

    CHECK_THROWS_AS(priority_allocate({}, specs, slot_cfg(40), 1.5), Error);
}

TEST_CASE("oob couples the fog grant to actual olt upstream") {
    const std::vector<TrafficClassSpec> specs{cls(1, 1, 90), cls(2, 2, 90)};

    // uniform full windows, fraction 1: fog cap equals the window
    const GrantSchedule full = oob_allocate(
        {report(0, {{{30}}, {{0, 40}}}, 0), report(1, {{{30}}, {{0, 40}}}, 0)},
        slot_cfg(40), 1.0);
    CHECK(full.onus[0].olt_class_queue[1][1] == 20);  // window = 20
    CHECK(full.onus[0].class_queue[0][0] == 20);

    // no olt traffic means no fog grant, regardless of fog backlog
    const GrantSchedule idle = oob_allocate(
        {report(0, {{{30}}, {{0, 0}}}, 0), report(1, {{{0}}, {{0, 40}}}, 0)},
        slot_cfg(40), 0.5);
    CHECK(idle.onus[0].class_queue[0][0] == 0);
    CHECK(idle.onus[1].olt_class_queue[1][1] == 20);

    // heavy fog demand against a small olt window: the cap binds
    const GrantSchedule capped = oob_allocate(
        {report(0, {{{30}}, {{0, 4}}}, 0), report(1, {{{0}}, {{0, 0}}}, 0)},
        slot_cfg(40), 0.5);
    CHECK(capped.onus[0].olt_class_queue[1][1] == 4);
    CHECK(capped.onus[0].class_queue[0][0] == 2);  // floor(0.5 * 4)
}

TEST_CASE("allocators never exceed budgets or reported backlog") {
    Rng rng(606);
    const std::vector<std::string> names{"mpc", "myopic", "fixed", "assured", "priority", "oob"};
    for (int trial = 0; trial < 40; ++trial) {
        const int n_onus = static_cast<int>(rng.uniform_int(1, 5));
        std::vector<TrafficClassSpec> specs{cls(1, 1, rng.uniform_int(0, 30)),
                                            cls(2, static_cast<int>(rng.uniform_int(2, 5)),
                                                rng.uniform_int(0, 30))};
        std::vector<OnuReport> reports;
        for (int o = 0; o < n_onus; ++o) {
            std::vector<VirtualQueueBank> banks;
            for (const TrafficClassSpec& spec : specs) {
                VirtualQueueBank bank = VirtualQueueBank::zeros(spec.k_slots);
                for (auto& q : bank.q) q = rng.uniform_int(0, 8);
                banks.push_back(std::move(bank));
            }
            reports.push_back(report(o, std::move(banks), rng.uniform_int(0, 12)));
        }
        const SlotConfig cfg = slot_cfg(rng.uniform_int(1, 40), 2);
        const std::vector<std::vector<std::int64_t>> pred{
            {rng.uniform_int(0, 5), rng.uniform_int(0, 5)},
            {rng.uniform_int(0, 5), rng.uniform_int(0, 5)}};
        for (const std::string& name : names) {
            const GrantSchedule gs =
                allocate_by_name(name, reports, specs, cfg, pred, AllocatorParams{});
            CHECK(gs.fog_total() <= cfg.lambda_packets);
            CHECK(gs.olt_total() <= cfg.lambda_packets);
            for (int o = 0; o < n_onus; ++o) {
                std::int64_t be = gs.onus[static_cast<std::size_t>(o)].best_effort +
                                  gs.onus[static_cast<std::size_t>(o)].olt_best_effort;
                CHECK(be <= reports[static_cast<std::size_t>(o)].best_effort_backlog);
                for (std::size_t c = 0; c < specs.size(); ++c)
                    for (int i = 0; i < specs[c].k_slots; ++i) {
                        std::int64_t granted =
                            gs.onus[static_cast<std::size_t>(o)].class_queue[c][static_cast<std::size_t>(i)];
                        if (!gs.onus[static_cast<std::size_t>(o)].olt_class_queue.empty())
                            granted += gs.onus[static_cast<std::size_t>(o)]
                                           .olt_class_queue[c][static_cast<std::size_t>(i)];
                        CHECK(granted >= 0);
                        CHECK(granted <=
                              reports[static_cast<std::size_t>(o)].banks[c].q[static_cast<std::size_t>(i)]);
                    }
            }
            // determinism
            const GrantSchedule again =
                allocate_by_name(name, reports, specs, cfg, pred, AllocatorParams{});
            CHECK(gs.onus.size() == again.onus.size());
            for (std::size_t o = 0; o < gs.onus.size(); ++o) {
                CHECK(gs.onus[o].class_queue == again.onus[o].class_queue);
                CHECK(gs.onus[o].best_effort == again.onus[o].best_effort);
            }
        }
    }
    CHECK_THROWS_AS(allocate_by_name("nope", {}, {}, slot_cfg(1), {}, AllocatorParams{}),
                    InvalidScenarioError);
}
