#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "topotrack/features.hpp"
#include "topotrack/trajectory.hpp"

namespace topotrack {

using FeatureVec = std::vector<std::int64_t>;

/// Labeled feature vectors with a shared class table.
struct Dataset {
    std::vector<std::string> classes;
    std::vector<FeatureVec> x;
    std::vector<int> y;  // index into classes

    std::size_t dimension() const { return x.empty() ? 0 : x.front().size(); }
    void validate() const;
};

struct SgdConfig {
    double learning_rate = 0.1;  // decays as 1/sqrt(t)
    int epochs = 50;
    double l2 = 1e-4;
    std::uint64_t seed = 0;
};

/// Softmax over negated affine scores: p(c|x) = exp(-<w_c,x>-b_c) / sum.
struct LogisticModel {
    std::vector<std::string> classes;
    std::vector<std::vector<double>> weights;  // per class
    std::vector<double> bias;

    std::size_t dimension() const { return weights.empty() ? 0 : weights.front().size(); }
};

LogisticModel lr_train(const Dataset& data, const SgdConfig& config);
std::vector<double> lr_predict(const LogisticModel& model, const FeatureVec& x);

/// Independent Poisson counts per dimension; rates are per-class means
/// clamped below at eps.
struct PoissonModel {
    std::vector<std::string> classes;
    std::vector<std::vector<double>> rates;
    double eps = 1e-3;
};

PoissonModel poisson_fit(const Dataset& data, double eps = 1e-3);
double poisson_log_likelihood(const PoissonModel& model, const FeatureVec& x, int c);

/// Counts as one multinomial draw; probabilities are normalized class sums
/// with additive-eps smoothing.
struct MultinomialModel {
    std::vector<std::string> classes;
    std::vector<std::vector<double>> probs;
    double eps = 1e-3;
};

MultinomialModel multinomial_fit(const Dataset& data, double eps = 1e-3);
double multinomial_log_likelihood(const MultinomialModel& model, const FeatureVec& x, int c);

enum class ModelType { logistic, poisson, multinomial };

const char* to_string(ModelType type);
ModelType model_type_from_string(const std::string& name);

/// A fitted classifier together with everything needed to reproduce its
/// featurization: signal kinds, per-signal binning, augmentation flag, and
/// class priors. This is the unit the tracker consumes and the model file
/// serializes.
struct BehaviorModel {
    ModelType type = ModelType::logistic;
    std::vector<std::string> classes;
    std::vector<double> priors;  // defaults to uniform
    std::vector<SignalKind> signals{SignalKind::speed};
    std::map<SignalKind, BinningParams> binning;
    bool augmented = true;
    int window = 0;  // training window in samples, 0 = whole track

    LogisticModel logistic;
    MultinomialModel multinomial;
    PoissonModel poisson;

    bool fitted() const { return !classes.empty(); }
    std::size_t num_classes() const { return classes.size(); }

    FeatureVec featurize(const Tracklet& tracklet) const;

    /// Per-class log-likelihood of a feature vector. Generative models return
    /// ln p(x|c); the logistic model returns ln(p(c|x)/prior_c), a likelihood
    /// up to the common factor p(x).
    std::vector<double> class_log_likelihood(const FeatureVec& x) const;

    /// Posterior over classes given priors.
    std::vector<double> posterior(const FeatureVec& x) const;

    /// ln p(x | false target): uniform over count vectors with the same total
    /// for generative models, 0 for the logistic model (likelihoods there are
    /// already referenced to the marginal).
    double false_target_log_likelihood(const FeatureVec& x) const;
};

/// Argmax class; generative models weight likelihood by prior. Ties break
/// toward the lowest class index.
int classify(const BehaviorModel& model, const FeatureVec& x);

/// Featurization pipeline shared by training, evaluation, and the tracker:
/// behavior signals -> (augmented) diagrams -> skew -> bins -> concatenation.
FeatureVec featurize_tracklet(const Tracklet& tracklet, const std::vector<SignalKind>& signals,
                              const std::map<SignalKind, BinningParams>& binning, bool augmented);

/// Fit per-signal binning bounds from training tracklets.
std::map<SignalKind, BinningParams> fit_binning(const std::vector<Tracklet>& tracklets,
                                                const std::vector<SignalKind>& signals, int rows,
                                                int cols, bool augmented);

/// Assemble a dataset from labeled tracklets (unlabeled ones are rejected).
Dataset build_dataset(const std::vector<Tracklet>& tracklets,
                      const std::vector<SignalKind>& signals,
                      const std::map<SignalKind, BinningParams>& binning, bool augmented);

}  // namespace topotrack
