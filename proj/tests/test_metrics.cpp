#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pan/errors.hpp"
#include "pan/metrics.hpp"
#include "pan/rng.hpp"
#include "testutil.hpp"

using namespace pan;

namespace {

// Brute-force reference written straight from the metric definitions:
// triple loop, filter on the true count, average over retained samples.
struct BruteResult {
    std::vector<double> rmse, mape;
    std::vector<std::uint64_t> evaluated, filtered;
};

BruteResult brute_force(const PredictedFrames& preds, const FrameSeries& truths,
                        const std::vector<int>& slots, double threshold) {
    BruteResult res;
    res.rmse.assign(truths.states, 0.0);
    res.mape.assign(truths.states, 0.0);
    res.evaluated.assign(truths.states, 0);
    res.filtered.assign(truths.states, 0);
    for (int k = 0; k < truths.states; ++k) {
        double sq = 0.0, ape = 0.0;
        for (std::size_t t = 0; t < slots.size(); ++t)
            for (int i = 0; i < truths.rows; ++i)
                for (int j = 0; j < truths.cols; ++j) {
                    const double d = truths.at(slots[t], i, j, k);
                    if (d < threshold) {
                        ++res.filtered[k];
                        continue;
                    }
                    const double p = preds.at(static_cast<int>(t), i, j, k);
                    sq += (p - d) * (p - d);
                    ape += std::fabs(p - d) / d;
                    ++res.evaluated[k];
                }
        if (res.evaluated[k] > 0) {
            res.rmse[k] = std::sqrt(sq / static_cast<double>(res.evaluated[k]));
            res.mape[k] = ape / static_cast<double>(res.evaluated[k]);
        }
    }
    return res;
}

}  // namespace

TEST_CASE("perfect predictions give zero error") {
    FrameSeries truths(3, 2, 2, 2);
    for (auto& v : truths.counts) v = 20;
    std::vector<int> slots{0, 1, 2};
    PredictedFrames preds = make_predicted(3, 2, 2, 2);
    for (auto& v : preds.values) v = 20.0;
    const MetricsReport r = evaluate(preds, truths, slots, 10.0);
    for (const StateMetrics& m : r.per_state) {
        CHECK(*m.rmse == 0.0);
        CHECK(*m.mape == 0.0);
    }
}

TEST_CASE("single retained sample by hand: p=110, d=100") {
    FrameSeries truths(1, 1, 1, 1);
    truths.counts[0] = 100;
    PredictedFrames preds = make_predicted(1, 1, 1, 1);
    preds.values[0] = 110.0;
    std::vector<int> slots{0};
    const MetricsReport r = evaluate(preds, truths, slots, 10.0);
    CHECK(*r.per_state[0].rmse == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(*r.per_state[0].mape == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(r.per_state[0].evaluated == 1);
}

TEST_CASE("evaluate matches the brute-force oracle on random instances") {
    RngStream rng(71);
    for (int trial = 0; trial < 30; ++trial) {
        FrameSeries truths(4, 5, 5, 2);
        for (auto& v : truths.counts) v = static_cast<std::uint32_t>(rng.next_below(30));
        PredictedFrames preds = make_predicted(4, 5, 5, 2);
        for (auto& v : preds.values) v = 30.0 * rng.next_double();
        std::vector<int> slots{0, 1, 2, 3};
        const MetricsReport got = evaluate(preds, truths, slots, 10.0);
        const BruteResult want = brute_force(preds, truths, slots, 10.0);
        for (int k = 0; k < 2; ++k) {
            CHECK(got.per_state[k].evaluated == want.evaluated[k]);
            CHECK(got.per_state[k].filtered == want.filtered[k]);
            if (want.evaluated[k] > 0) {
                CHECK(std::fabs(*got.per_state[k].rmse - want.rmse[k]) < 1e-12);
                CHECK(std::fabs(*got.per_state[k].mape - want.mape[k]) < 1e-12);
            } else {
                CHECK(!got.per_state[k].rmse);
            }
        }
    }
}

TEST_CASE("a sample at exactly the threshold is retained") {
    FrameSeries truths(1, 1, 2, 1);
    truths.at(0, 0, 0, 0) = 10;  // exactly at the filter
    truths.at(0, 0, 1, 0) = 9;   // strictly below
    PredictedFrames preds = make_predicted(1, 1, 2, 1);
    preds.values = {12.0, 12.0};
    std::vector<int> slots{0};
    const MetricsReport r = evaluate(preds, truths, slots, 10.0);
    CHECK(r.per_state[0].evaluated == 1);
    CHECK(r.per_state[0].filtered == 1);
    CHECK(*r.per_state[0].rmse == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("evaluated + filtered covers every cell-slot sample") {
    RngStream rng(72);
    FrameSeries truths(6, 3, 4, 2);
    for (auto& v : truths.counts) v = static_cast<std::uint32_t>(rng.next_below(25));
    PredictedFrames preds = make_predicted(6, 3, 4, 2);
    std::vector<int> slots(6);
    std::iota(slots.begin(), slots.end(), 0);
    const MetricsReport r = evaluate(preds, truths, slots, 10.0);
    for (const StateMetrics& m : r.per_state) {
        CHECK(m.evaluated + m.filtered == 6u * 3u * 4u);
    }
}

TEST_CASE("raising the threshold never retains more samples") {
    RngStream rng(73);
    FrameSeries truths(4, 4, 4, 1);
    for (auto& v : truths.counts) v = static_cast<std::uint32_t>(rng.next_below(40));
    PredictedFrames preds = make_predicted(4, 4, 4, 1);
    std::vector<int> slots{0, 1, 2, 3};
    std::uint64_t prev = UINT64_MAX;
    for (double threshold : {0.0, 5.0, 10.0, 20.0, 40.0}) {
        const MetricsReport r = evaluate(preds, truths, slots, threshold);
        CHECK(r.per_state[0].evaluated <= prev);
        prev = r.per_state[0].evaluated;
    }
}

TEST_CASE("threshold zero on positive truths equals the textbook formulas") {
    RngStream rng(74);
    FrameSeries truths(3, 3, 3, 1);
    for (auto& v : truths.counts) v = 1 + static_cast<std::uint32_t>(rng.next_below(20));
    PredictedFrames preds = make_predicted(3, 3, 3, 1);
    for (auto& v : preds.values) v = 20.0 * rng.next_double();
    std::vector<int> slots{0, 1, 2};
    const MetricsReport r = evaluate(preds, truths, slots, 0.0);
    const BruteResult want = brute_force(preds, truths, slots, 0.0);
    CHECK(r.per_state[0].filtered == 0);
    CHECK(std::fabs(*r.per_state[0].rmse - want.rmse[0]) < 1e-12);
    CHECK(std::fabs(*r.per_state[0].mape - want.mape[0]) < 1e-12);
}

TEST_CASE("mape is scale-invariant while rmse scales") {
    FrameSeries truths(1, 2, 2, 1);
    truths.counts = {20, 30, 40, 50};
    PredictedFrames preds = make_predicted(1, 2, 2, 1);
    preds.values = {22.0, 27.0, 44.0, 45.0};
    std::vector<int> slots{0};
    const MetricsReport base = evaluate(preds, truths, slots, 0.0);

    const double alpha = 3.0;
    FrameSeries truths2 = truths;
    for (auto& v : truths2.counts) v *= 3;
    PredictedFrames preds2 = preds;
    for (auto& v : preds2.values) v *= alpha;
    const MetricsReport scaled = evaluate(preds2, truths2, slots, 0.0);
    CHECK(*scaled.per_state[0].mape == doctest::Approx(*base.per_state[0].mape).epsilon(1e-12));
    CHECK(*scaled.per_state[0].rmse ==
          doctest::Approx(alpha * *base.per_state[0].rmse).epsilon(1e-12));
}

TEST_CASE("all samples filtered marks the metrics undefined") {
    FrameSeries truths(1, 2, 2, 1);
    truths.counts = {1, 2, 3, 4};
    PredictedFrames preds = make_predicted(1, 2, 2, 1);
    std::vector<int> slots{0};
    const MetricsReport r = evaluate(preds, truths, slots, 10.0);
    CHECK(!r.per_state[0].rmse);
    CHECK(!r.per_state[0].mape);
    CHECK(r.per_state[0].filtered == 4);
}

TEST_CASE("ha predicts the constant on constant data") {
    FrameSeries train(14, 2, 2, 1);
    for (auto& v : train.counts) v = 7;
    std::vector<int> targets{14, 15, 16};
    const PredictedFrames ha = baseline_ha(train, targets, 7);
    for (double v : ha.values) CHECK(v == 7.0);
}

TEST_CASE("ha is exact on weekly-periodic data") {
    const int week = 14;
    FrameSeries all = test::periodic_series(4 * week, 3, 3, 2, 2);  // day = 2 slots, week = 14
    auto [train, tst] = split_frames(all, 2 * week);
    std::vector<int> targets;
    for (int t = 2 * week; t < 4 * week; ++t) targets.push_back(t);
    const PredictedFrames ha = baseline_ha(train, targets, week);
    const MetricsReport r = evaluate(ha, all, targets, 0.0);
    CHECK(*r.per_state[0].rmse < 1e-9);
    CHECK(*r.per_state[1].rmse < 1e-9);
}

TEST_CASE("ha averages the training weeks per slot-of-week") {
    const int week = 7;
    FrameSeries train(2 * week, 1, 1, 1);
    for (int t = 0; t < week; ++t) train.at(t, 0, 0, 0) = 10;
    for (int t = week; t < 2 * week; ++t) train.at(t, 0, 0, 0) = 20;
    std::vector<int> targets{2 * week + 3};
    const PredictedFrames ha = baseline_ha(train, targets, week);
    CHECK(ha.values[0] == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("ha requires at least one training week") {
    FrameSeries train(5, 1, 1, 1);
    std::vector<int> targets{5};
    CHECK_THROWS_AS(baseline_ha(train, targets, 7), pan::ConfigError);
}

TEST_CASE("persistence copies the previous frame") {
    FrameSeries frames(5, 1, 2, 1);
    for (int t = 0; t < 5; ++t) {
        frames.at(t, 0, 0, 0) = 10 * (t + 1);
        frames.at(t, 0, 1, 0) = 10 * (t + 1);
    }
    std::vector<int> targets{2, 4};
    const PredictedFrames p = baseline_persistence(frames, targets);
    CHECK(p.at(0, 0, 0, 0) == 20.0);
    CHECK(p.at(1, 0, 1, 0) == 40.0);

    // Constant data has zero persistence error.
    FrameSeries constant(4, 1, 1, 1);
    for (auto& v : constant.counts) v = 30;
    std::vector<int> t2{1, 2, 3};
    const MetricsReport r = evaluate(baseline_persistence(constant, t2), constant, t2, 0.0);
    CHECK(*r.per_state[0].rmse == 0.0);
}

TEST_CASE("persistence error on a step change is the step height") {
    FrameSeries frames(2, 1, 1, 1);
    frames.at(0, 0, 0, 0) = 20;
    frames.at(1, 0, 0, 0) = 35;
    std::vector<int> targets{1};
    const MetricsReport r = evaluate(baseline_persistence(frames, targets), frames, targets, 0.0);
    CHECK(*r.per_state[0].rmse == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("persistence rmse tracks the step noise of a random walk") {
    RngStream rng(75);
    const double sigma = 4.0;
    const int n = 4000;
    FrameSeries frames(n, 1, 1, 1);
    double level = 1000.0;
    for (int t = 0; t < n; ++t) {
        level += sigma * rng.next_normal();
        frames.at(t, 0, 0, 0) = static_cast<std::uint32_t>(std::llround(level));
    }
    std::vector<int> targets;
    for (int t = 1; t < n; ++t) targets.push_back(t);
    const MetricsReport r = evaluate(baseline_persistence(frames, targets), frames, targets, 0.0);
    // Rounding to integer counts adds ~1/12 variance per endpoint.
    CHECK(*r.per_state[0].rmse == doctest::Approx(sigma).epsilon(0.1));
}
