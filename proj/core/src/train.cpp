#include "pan/train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pan/errors.hpp"
#include "pan/optimizer.hpp"

namespace pan {

std::vector<int> valid_targets(const WindowConfig& wcfg, int first_target, int limit_slot) {
    const int min_target = earliest_valid(wcfg) + 1;
    std::vector<int> targets;
    for (int u = std::max(first_target, min_target); u < limit_slot; ++u) targets.push_back(u);
    return targets;
}

namespace {

std::vector<WindowPlan> plans_for(const std::vector<int>& targets, std::size_t begin,
                                  std::size_t end, const WindowConfig& wcfg) {
    std::vector<WindowPlan> plans;
    plans.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) plans.push_back(plan_window(targets[k] - 1, wcfg));
    return plans;
}

std::string slot_list(const std::vector<int>& targets, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t k = begin; k < end; ++k) {
        if (!out.empty()) out += ", ";
        out += std::to_string(targets[k]);
    }
    return out;
}

}  // namespace

TrainTrace train_model(PanModel& model, const FrameStore& store, const WindowConfig& wcfg,
                       const std::vector<int>& targets, const TrainConfig& tcfg, RngStream& rng) {
    if (targets.empty()) throw ConfigError("training needs at least one valid target slot");
    if (tcfg.batch_size < 1) throw ConfigError("batch size must be >= 1");

    AdamOptimizer adam(tcfg.lr);
    const std::vector<ParamRef> params = model.params();
    std::vector<int> order = targets;
    TrainTrace trace;
    trace.epoch_mean_loss.reserve(tcfg.epochs);

    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        // Fisher-Yates off the deterministic stream.
        for (std::size_t k = order.size(); k > 1; --k) {
            const std::size_t j = static_cast<std::size_t>(rng.next_below(k));
            std::swap(order[k - 1], order[j]);
        }
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size();
             begin += static_cast<std::size_t>(tcfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), begin + static_cast<std::size_t>(tcfg.batch_size));
            const auto plans = plans_for(order, begin, end, wcfg);
            const Tensor input = materialize_batch(plans, store);
            std::vector<int> batch_targets(order.begin() + begin, order.begin() + end);
            const Tensor truth = gather_slots(batch_targets, store);

            const Tensor pred = model.forward(input, Mode::Train, rng);
            const LossResult loss = mixed_loss(pred, truth);
            if (!std::isfinite(loss.value)) {
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                                   " for target slots [" + slot_list(order, begin, end) + "]");
            }
            model.backward(loss.grad);
            adam.step(params);
            loss_sum += loss.value * static_cast<double>(end - begin);
        }
        trace.epoch_mean_loss.push_back(loss_sum / static_cast<double>(order.size()));
    }
    return trace;
}

Tensor predict_targets(PanModel& model, const FrameStore& store, const WindowConfig& wcfg,
                       const std::vector<int>& targets, int batch_size) {
    if (targets.empty()) throw ConfigError("predict_targets: no targets");
    if (batch_size < 1) batch_size = 1;
    Tensor out(static_cast<int>(targets.size()), store.rows(), store.cols(), store.states());
    RngStream unused(0);  // eval mode consumes no randomness
    const std::size_t block = static_cast<std::size_t>(store.rows()) * store.cols() * store.states();
    for (std::size_t begin = 0; begin < targets.size();
         begin += static_cast<std::size_t>(batch_size)) {
        const std::size_t end =
            std::min(targets.size(), begin + static_cast<std::size_t>(batch_size));
        const auto plans = plans_for(targets, begin, end, wcfg);
        const Tensor input = materialize_batch(plans, store);
        const Tensor pred = model.forward(input, Mode::Eval, unused);
        std::copy(pred.data.begin(), pred.data.end(), out.data.begin() + begin * block);
    }
    return out;
}

}  // namespace pan
