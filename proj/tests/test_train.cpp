#include <doctest.h>

#include <cmath>

#include "pan/errors.hpp"
#include "pan/train.hpp"
#include "testutil.hpp"

using namespace pan;

namespace {

struct Fixture {
    FrameSeries frames;
    NormStats stats;
    FrameStore store;
    WindowConfig wcfg;
    ModelConfig mcfg;
};

Fixture daily_fixture(int num_slots = 40) {
    Fixture f;
    f.frames = test::periodic_series(num_slots, 4, 4, 1, 8);
    f.stats = compute_norm_stats(f.frames, 0, f.frames.num_slots);
    f.store = FrameStore::from_series(f.frames, f.stats);
    f.wcfg.n_r = 2;
    f.wcfg.n_d = 1;
    f.wcfg.n_w = 0;
    f.wcfg.slots_per_day = 8;
    f.mcfg.rows = 4;
    f.mcfg.cols = 4;
    f.mcfg.states = 1;
    f.mcfg.input_channels = f.wcfg.plan_length();
    f.mcfg.c_f = 16;
    f.mcfg.n_pasti = 2;
    f.mcfg.n0 = 1;
    f.mcfg.n1 = 1;
    f.mcfg.n2 = 1;
    f.mcfg.c0 = 16;
    f.mcfg.c1 = 8;
    f.mcfg.c2 = 8;
    return f;
}

}  // namespace

TEST_CASE("valid_targets honors the lookback and the split") {
    WindowConfig wcfg;
    wcfg.n_r = 2;
    wcfg.n_d = 1;
    wcfg.n_w = 0;
    wcfg.slots_per_day = 8;
    // earliest t = 1 + 8 = 9, so the first target is 10.
    const std::vector<int> train = valid_targets(wcfg, 1, 20);
    CHECK(train.front() == 10);
    CHECK(train.back() == 19);
    const std::vector<int> test_side = valid_targets(wcfg, 20, 24);
    CHECK(test_side == std::vector<int>{20, 21, 22, 23});
}

TEST_CASE("zero learning rate leaves parameters unchanged but records loss") {
    Fixture f = daily_fixture();
    RngStream init(7);
    PanModel model(f.mcfg, init);
    std::vector<std::vector<double>> before;
    for (const ParamRef& p : model.params()) before.push_back(*p.value);

    const std::vector<int> targets = valid_targets(f.wcfg, 1, f.frames.num_slots);
    TrainConfig tcfg{1, 8, 0.0, 7};
    RngStream train_rng(8);
    const TrainTrace trace = train_model(model, f.store, f.wcfg, targets, tcfg, train_rng);
    REQUIRE(trace.epoch_mean_loss.size() == 1);
    CHECK(std::isfinite(trace.epoch_mean_loss[0]));

    const auto params = model.params();
    for (std::size_t p = 0; p < params.size(); ++p) CHECK(*params[p].value == before[p]);
}

TEST_CASE("training is deterministic given the seed") {
    Fixture f = daily_fixture();
    const std::vector<int> targets = valid_targets(f.wcfg, 1, f.frames.num_slots);
    TrainConfig tcfg{3, 8, 1e-3, 11};

    RngStream i1(11), t1(12);
    PanModel m1(f.mcfg, i1);
    const TrainTrace a = train_model(m1, f.store, f.wcfg, targets, tcfg, t1);

    RngStream i2(11), t2(12);
    PanModel m2(f.mcfg, i2);
    const TrainTrace b = train_model(m2, f.store, f.wcfg, targets, tcfg, t2);

    CHECK(a.epoch_mean_loss == b.epoch_mean_loss);
    const auto p1 = m1.params(), p2 = m2.params();
    for (std::size_t p = 0; p < p1.size(); ++p) CHECK(*p1[p].value == *p2[p].value);
}

TEST_CASE("training reduces the loss on a learnable fixture") {
    Fixture f = daily_fixture(48);
    f.mcfg.dropout_rate = 0.0;
    const std::vector<int> targets = valid_targets(f.wcfg, 1, f.frames.num_slots);
    TrainConfig tcfg{60, 8, 2e-3, 21};
    RngStream init(21), train_rng(22);
    PanModel model(f.mcfg, init);
    const TrainTrace trace = train_model(model, f.store, f.wcfg, targets, tcfg, train_rng);
    CHECK(trace.epoch_mean_loss.back() < 0.5 * trace.epoch_mean_loss.front());
}

TEST_CASE("predict_targets is a pure eval pass with batched gather") {
    Fixture f = daily_fixture();
    RngStream init(31);
    PanModel model(f.mcfg, init);
    const std::vector<int> targets = valid_targets(f.wcfg, 1, f.frames.num_slots);
    const Tensor a = predict_targets(model, f.store, f.wcfg, targets, 4);
    const Tensor b = predict_targets(model, f.store, f.wcfg, targets, 7);
    CHECK(a.data == b.data);  // batch size must not matter
    CHECK(a.n() == static_cast<int>(targets.size()));
    CHECK(a.c() == 1);
}

TEST_CASE("empty target list is a config error") {
    Fixture f = daily_fixture();
    RngStream init(41), train_rng(42);
    PanModel model(f.mcfg, init);
    TrainConfig tcfg{1, 8, 1e-3, 41};
    CHECK_THROWS_AS(train_model(model, f.store, f.wcfg, {}, tcfg, train_rng), ConfigError);
}
