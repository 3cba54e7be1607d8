#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rarecast/matrix.hpp"
#include "rarecast/params.hpp"
#include "rarecast/rng.hpp"
#include "rarecast/sequence.hpp"

namespace rarecast::model {

/// The five architectures. `supervised` trains the event head directly with
/// no forecast head. `joint` shares LSTM+embedding between the event head and
/// the forecast head. `joint_branched` adds one linear+ReLU layer per branch
/// after the embedding. `embedding` is the joint network trained in two
/// phases (forecast-only pretraining, then event head over frozen features).
/// `residual` extends `embedding` with a linear path from the raw input added
/// to the embedding before the event layer; its second phase also unfreezes
/// the embedding.
enum class ArchKind { supervised, joint, joint_branched, embedding, residual };

enum class ForecastMode { sigmoid, softmax_per_task };
enum class RunMode { train, eval };

const char* arch_kind_name(ArchKind kind);
ArchKind arch_kind_from_name(const std::string& name);
const char* forecast_mode_name(ForecastMode mode);
ForecastMode forecast_mode_from_name(const std::string& name);

struct ModelConfig {
    ArchKind kind = ArchKind::joint;
    int d_in = 0;
    int hidden = 0;
    int embed = 0;
    int branch_width = 0;  // 0 means "same as embed"; only joint_branched uses it
    double dropout_embed = 0.0;
    double dropout_branch = 0.0;
    ForecastMode forecast_mode = ForecastMode::sigmoid;
    data::TaskLayout tasks;  // required unless kind == supervised

    void validate() const;  // throws on invalid kind/size combinations
    bool has_forecast_head() const { return kind != ArchKind::supervised; }
    bool has_branches() const { return kind == ArchKind::joint_branched; }
    bool has_residual() const { return kind == ArchKind::residual; }
    int effective_branch_width() const { return branch_width > 0 ? branch_width : embed; }
    int event_input_width() const;
    int forecast_input_width() const;
};

/// Create all parameter blocks for `cfg`. Weights are uniform in
/// +/- 1/sqrt(fan-in), each block drawn from its own stream split off `root`
/// by block name, so architectures sharing a block name initialize it
/// identically under the same seed. Biases start at zero.
ParamSet build_architecture(const ModelConfig& cfg, const num::RngStream& root);

// ---------------------------------------------------------------------------
// Single-step pieces (exposed for tests; forward_sequence composes them)

/// Standard LSTM cell with forget gate. Returns (h_t, c_t).
std::pair<num::Matrix, num::Matrix> lstm_step(const num::Matrix& x,
                                              const num::Matrix& h_prev,
                                              const num::Matrix& c_prev,
                                              const ParamSet& params);

/// relu(W_e h + b_e), with inverted dropout in train mode when rate > 0.
num::Matrix embed_state(const num::Matrix& h, const ParamSet& params, double rate,
                        RunMode mode, num::RngStream* rng);

/// sigma(a_y . e + b_y)
double predict_target(const num::Matrix& e, const ParamSet& params);

/// Forecast probabilities from logits z = A_X^T e + b_X; `mode` selects
/// elementwise sigmoid or softmax within each task's class block.
num::Matrix predict_forecast(const num::Matrix& e, const ParamSet& params,
                             const data::TaskLayout& tasks, ForecastMode mode);

/// Cross entropy with probabilities clamped to [1e-12, 1 - 1e-12].
double target_loss(double prob, int label);

/// Mean over tasks of the true-class cross entropy.
double forecast_loss(const num::Matrix& probs, const std::vector<int>& classes,
                     const data::TaskLayout& tasks);

/// p * err_event + (1-p) * err_forecast, with p == 1 and p == 0 returning
/// the surviving term bit-exactly.
double combined_loss(double p, double err_event, double err_forecast);

// ---------------------------------------------------------------------------
// Sequence-level forward/backward

struct StepTrace {
    bool valid = false;
    num::Matrix x;
    num::Matrix h_prev, c_prev;
    num::Matrix gate_i, gate_f, gate_o, gate_g;
    num::Matrix c, tanh_c, h;
    num::Matrix emb_pre, emb_act, emb_mask, emb_out;
    num::Matrix resid_out;
    num::Matrix br_event_pre, br_event_act, br_event_mask, br_event_out;
    num::Matrix br_fc_pre, br_fc_act, br_fc_mask, br_fc_out;
    num::Matrix e_event, e_forecast;
    double event_logit = 0.0;
    double event_prob = 0.5;
    num::Matrix fc_logits, fc_probs;
    double err_event = 0.0;
    double err_forecast = 0.0;
};

struct ForwardResult {
    std::vector<StepTrace> steps;
    std::size_t valid_steps = 0;
    double total_loss = 0.0;          // mean combined loss over valid steps
    double event_loss_mean = 0.0;     // diagnostics
    double forecast_loss_mean = 0.0;
};

/// Run the whole sequence from zero initial state. Masked steps are skipped
/// entirely: state carries through unchanged, no loss, no dropout draws, so
/// inserting one changes nothing. `event_weight` is the loss mixing p; for
/// kinds without a forecast head the combined loss is the event term.
/// Throws when every step is masked.
ForwardResult forward_sequence(const data::EncodedSequence& seq, const ParamSet& params,
                               const ModelConfig& cfg, RunMode mode, double event_weight,
                               num::RngStream* rng);

/// Exact gradient of forward_sequence's total loss for every block, via
/// backpropagation through time over the recorded trace (dropout masks are
/// reused from the trace). With p == 1 forecast-head gradients are exactly
/// zero; with p == 0 event-head gradients are exactly zero. Throws if any
/// gradient turns out non-finite, naming the block.
ParamSet backward_sequence(const data::EncodedSequence& seq, const ParamSet& params,
                           const ModelConfig& cfg, double event_weight,
                           const ForwardResult& fwd);

}  // namespace rarecast::model
