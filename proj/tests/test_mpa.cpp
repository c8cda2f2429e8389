#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace cpiscma;

namespace {

// random slot content for the bundled codebook: `actives` users transmit a
// random symbol, the rest are silent
std::vector<int> random_slot_entries(Engine& rng, int users, int actives, int M) {
    std::vector<int> entries(users, -1);
    std::vector<int> order(users);
    for (int j = 0; j < users; ++j) order[j] = j;
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<int> sym(0, M - 1);
    for (int i = 0; i < actives; ++i) entries[order[i]] = sym(rng);
    return entries;
}

cvec slot_signal(const Codebook& cb, const std::vector<cvec>& h, const std::vector<int>& entries,
                 double scale) {
    cvec y(cb.num_resources, cplx{0.0, 0.0});
    for (int j = 0; j < cb.num_users; ++j) {
        if (entries[j] < 0) continue;
        for (int k = 0; k < cb.num_resources; ++k)
            y[k] += h[j][k] * scale * cb.entries[j][entries[j]][k];
    }
    return y;
}

void add_noise(Engine& rng, cvec& y, double n0) {
    std::normal_distribution<double> comp(0.0, std::sqrt(n0 / 2.0));
    for (auto& c : y) c += cplx{comp(rng), comp(rng)};
}

}  // namespace

TEST_CASE("single-user likelihood peak") {
    const Codebook cb = testsup::toy_single_user();
    const FactorGraph fg = build_factor_graph(cb);
    const auto h = testsup::unit_gains(1, 2);
    MpaParams params;
    params.iterations = 4;

    const cvec y = {cb.entries[0][1][0], cb.entries[0][1][1]};  // symbol 2, noiseless
    const SlotDecision d = run_mpa_slot(y, h, cb, fg, 1e-12, 1.0, params);
    CHECK(d.entries[0] == 1);
    CHECK(d.posteriors[0][2] > 0.99);

    const cvec zero = {cplx{0.0, 0.0}, cplx{0.0, 0.0}};
    const SlotDecision dz = run_mpa_slot(zero, h, cb, fg, 1e-12, 1.0, params);
    CHECK(dz.entries[0] == -1);
}

TEST_CASE("N0 must be positive") {
    const Codebook cb = testsup::toy_single_user();
    const FactorGraph fg = build_factor_graph(cb);
    const auto h = testsup::unit_gains(1, 2);
    const cvec y(2, cplx{0.0, 0.0});
    CHECK_THROWS_AS(run_mpa_slot(y, h, cb, fg, 0.0, 1.0, MpaParams{}), DomainError);
}

TEST_CASE("messages stay normalized through every iteration") {
    const Codebook& cb = testsup::bundled_codebook();
    const FactorGraph fg = build_factor_graph(cb);
    Engine rng(101);
    const ChannelState ch = draw_channel(rng, 6, 1, 4);
    std::vector<cvec> h(6);
    for (int j = 0; j < 6; ++j) h[j] = ch.gains[j];
    const auto entries = random_slot_entries(rng, 6, 3, 4);
    cvec y = slot_signal(cb, h, entries, std::sqrt(2.0));
    add_noise(rng, y, 0.05);

    MpaParams params;
    params.iterations = 6;
    int checked = 0;
    run_mpa_slot(y, h, cb, fg, 0.05, std::sqrt(2.0), params, nullptr, nullptr,
                 [&](int, const MessageTable& mt) {
                     for (const auto& res : mt.fn_to_un)
                         for (const auto& edge : res) {
                             double s = 0.0;
                             for (double v : edge) {
                                 REQUIRE(v >= 0.0);
                                 REQUIRE(std::isfinite(v));
                                 s += v;
                             }
                             REQUIRE(std::abs(s - 1.0) < 1e-9);
                             ++checked;
                         }
                     for (const auto& res : mt.un_to_fn)
                         for (const auto& edge : res) {
                             double s = 0.0;
                             for (double v : edge) s += v;
                             REQUIRE(std::abs(s - 1.0) < 1e-9);
                         }
                 });
    CHECK(checked == 6 * 12);  // 12 edges, 6 iterations
}

TEST_CASE("without zero augmentation the detector is plain MPA over M symbols") {
    const Codebook& cb = testsup::bundled_codebook();
    const FactorGraph fg = build_factor_graph(cb);
    Engine rng(7);
    const ChannelState ch = draw_channel(rng, 6, 1, 4);
    std::vector<cvec> h(6);
    for (int j = 0; j < 6; ++j) h[j] = ch.gains[j];
    std::uniform_int_distribution<int> sym(0, 3);
    std::vector<int> entries(6);
    for (auto& e : entries) e = sym(rng);
    cvec y = slot_signal(cb, h, entries, 1.0);
    add_noise(rng, y, 1e-3);

    MpaParams params;
    params.augment_zero = false;
    MessageTable mt;
    const SlotDecision d = run_mpa_slot(y, h, cb, fg, 1e-3, 1.0, params, &mt);
    for (int j = 0; j < 6; ++j) {
        CHECK(d.posteriors[j].size() == 4);  // alphabet M, no zero entry
        CHECK(d.entries[j] >= 0);
    }
    CHECK(d.entries == entries);
}

TEST_CASE("slot error rate improves with SNR") {
    const Codebook& cb = testsup::bundled_codebook();
    const FactorGraph fg = build_factor_graph(cb);
    const double scale = std::sqrt(2.0);
    auto run_at = [&](double n0) {
        int wrong = 0;
        for (int trial = 0; trial < 10000; ++trial) {
            Engine rng(derive_seed(404, 0, trial));  // same seeds at both noise levels
            const ChannelState ch = draw_channel(rng, 6, 1, 4);
            std::vector<cvec> h(6);
            for (int j = 0; j < 6; ++j) h[j] = ch.gains[j];
            const auto entries = random_slot_entries(rng, 6, 3, 4);
            cvec y = slot_signal(cb, h, entries, scale);
            add_noise(rng, y, n0);
            MpaParams params;
            const SlotDecision d = run_mpa_slot(y, h, cb, fg, n0, scale, params);
            for (int j = 0; j < 6; ++j)
                if (d.entries[j] != entries[j]) ++wrong;
        }
        return wrong;
    };
    const double eb = 4.0 / 6.0;
    const int errs_5db = run_at(eb / std::pow(10.0, 0.5));
    const int errs_20db = run_at(eb / std::pow(10.0, 2.0));
    CHECK(errs_20db < errs_5db);
}

TEST_CASE("FN update cost follows the (M+1)^(d_f-1) law") {
    const Codebook& cb = testsup::bundled_codebook();
    const FactorGraph fg = build_factor_graph(cb);
    Engine rng(3);
    const ChannelState ch = draw_channel(rng, 6, 1, 4);
    std::vector<cvec> h(6);
    for (int j = 0; j < 6; ++j) h[j] = ch.gains[j];
    const auto entries = random_slot_entries(rng, 6, 3, 4);
    const cvec y = slot_signal(cb, h, entries, std::sqrt(2.0));

    MpaParams params;
    params.iterations = 6;
    MpaCost cost;
    run_mpa_slot(y, h, cb, fg, 0.01, std::sqrt(2.0), params, nullptr, &cost);

    const std::uint64_t A = 5;  // M + 1
    CHECK(fn_terms_per_hypothesis(5, 3) == 25);  // (M+1)^(d_f-1)
    // one likelihood table of A^{d_f} entries per resource, built once per slot
    CHECK(cost.gaussian_evals == 4 * A * A * A);
    // per iteration each of the d_f edges accumulates A * A^{d_f-1} terms
    std::uint64_t expect = 0;
    for (int k = 0; k < 4; ++k)
        expect += 6ull * fg.fn_degree[k] * A * fn_terms_per_hypothesis(5, fg.fn_degree[k]);
    CHECK(cost.fn_combo_terms == expect);
}

TEST_CASE("exhaustive ML toys") {
    {
        const Codebook cb = testsup::toy_single_user();
        const auto h = testsup::unit_gains(1, 2);
        const cvec y = {cb.entries[0][0][0], cb.entries[0][0][1]};
        CHECK(exhaustive_slot_ml(y, h, cb, 1.0, true) == std::vector<int>{0});
    }
    {
        const Codebook cb = testsup::toy_two_user_orthogonal();
        const auto h = testsup::unit_gains(2, 2);
        cvec y = {cb.entries[0][1][0], cb.entries[1][0][1]};
        CHECK(exhaustive_slot_ml(y, h, cb, 1.0, true) == std::vector<int>{1, 0});
    }
    {
        Codebook big;
        big.num_users = 9;  // guard kicks in
        big.num_resources = 1;
        big.num_symbols = 2;
        CHECK_THROWS_AS(exhaustive_slot_ml({}, {}, big, 1.0, true), DomainError);
    }
}

TEST_CASE("exhaustive ML recovers high-SNR transmissions") {
    const Codebook& cb = testsup::bundled_codebook();
    const double scale = std::sqrt(2.0);
    const double n0 = (4.0 / 6.0) / std::pow(10.0, 3.0);  // 30 dB
    int exact = 0;
    for (int trial = 0; trial < 300; ++trial) {
        Engine rng(derive_seed(505, 1, trial));
        const ChannelState ch = draw_channel(rng, 6, 1, 4);
        std::vector<cvec> h(6);
        for (int j = 0; j < 6; ++j) h[j] = ch.gains[j];
        const auto entries = random_slot_entries(rng, 6, 3, 4);
        cvec y = slot_signal(cb, h, entries, scale);
        add_noise(rng, y, n0);
        if (exhaustive_slot_ml(y, h, cb, scale, true) == entries) ++exact;
    }
    CHECK(exact >= 297);  // >= 99%
}

TEST_CASE("modified MPA tracks joint ML at high SNR") {
    const Codebook& cb = testsup::bundled_codebook();
    const FactorGraph fg = build_factor_graph(cb);
    const double scale = std::sqrt(2.0);
    const double n0 = (4.0 / 6.0) / std::pow(10.0, 3.0);  // 30 dB
    MpaParams params;
    params.iterations = 6;
    int agree = 0;
    const int trials = 300;
    for (int trial = 0; trial < trials; ++trial) {
        Engine rng(derive_seed(606, 2, trial));
        const ChannelState ch = draw_channel(rng, 6, 1, 4);
        std::vector<cvec> h(6);
        for (int j = 0; j < 6; ++j) h[j] = ch.gains[j];
        const auto entries = random_slot_entries(rng, 6, 3, 4);
        cvec y = slot_signal(cb, h, entries, scale);
        add_noise(rng, y, n0);
        const SlotDecision d = run_mpa_slot(y, h, cb, fg, n0, scale, params);
        if (d.entries == exhaustive_slot_ml(y, h, cb, scale, true)) ++agree;
    }
    CHECK(agree >= trials * 99 / 100);
}
