#include "topotrack/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "topotrack/errors.hpp"
#include "topotrack/random.hpp"

namespace topotrack {

namespace {

void check_counts(const FeatureVec& x) {
    for (std::int64_t v : x) {
        if (v < 0) throw RejectedInputError("feature vector entries must be non-negative counts");
    }
}

std::vector<std::vector<FeatureVec>> group_by_class(const Dataset& data) {
    std::vector<std::vector<FeatureVec>> groups(data.classes.size());
    for (std::size_t i = 0; i < data.x.size(); ++i) groups[data.y[i]].push_back(data.x[i]);
    for (std::size_t c = 0; c < groups.size(); ++c) {
        if (groups[c].empty()) {
            throw InsufficientDataError("class '" + data.classes[c] + "' has no examples");
        }
    }
    return groups;
}

std::vector<double> softmax(std::vector<double> scores) {
    const double m = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double& s : scores) {
        s = std::exp(s - m);
        sum += s;
    }
    for (double& s : scores) s /= sum;
    return scores;
}

double log_factorial(std::int64_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

void Dataset::validate() const {
    if (x.size() != y.size()) throw RejectedInputError("dataset: feature/label count mismatch");
    const std::size_t dim = dimension();
    for (const FeatureVec& v : x) {
        if (v.size() != dim) throw RejectedInputError("dataset: inconsistent feature dimensions");
    }
    for (int label : y) {
        if (label < 0 || static_cast<std::size_t>(label) >= classes.size()) {
            throw RejectedInputError("dataset: label index out of range");
        }
    }
}

const char* to_string(ModelType type) {
    switch (type) {
        case ModelType::logistic: return "logistic";
        case ModelType::poisson: return "poisson";
        case ModelType::multinomial: return "multinomial";
    }
    return "logistic";
}

ModelType model_type_from_string(const std::string& name) {
    if (name == "logistic") return ModelType::logistic;
    if (name == "poisson") return ModelType::poisson;
    if (name == "multinomial") return ModelType::multinomial;
    throw RejectedConfigError("unknown model type '" + name + "'");
}

LogisticModel lr_train(const Dataset& data, const SgdConfig& config) {
    data.validate();
    group_by_class(data);  // every class must be represented
    const std::size_t dim = data.dimension();
    const std::size_t n_classes = data.classes.size();

    LogisticModel model;
    model.classes = data.classes;
    model.weights.assign(n_classes, std::vector<double>(dim, 0.0));
    model.bias.assign(n_classes, 0.0);

    std::vector<std::size_t> index(data.x.size());
    std::iota(index.begin(), index.end(), 0);
    Rng rng(config.seed);

    std::size_t step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(index);
        for (std::size_t idx : index) {
            const FeatureVec& x = data.x[idx];
            const int label = data.y[idx];
            const double eta = config.learning_rate / std::sqrt(static_cast<double>(++step));

            std::vector<double> scores(n_classes, 0.0);
            for (std::size_t c = 0; c < n_classes; ++c) {
                double dot = model.bias[c];
                for (std::size_t k = 0; k < dim; ++k) {
                    dot += model.weights[c][k] * static_cast<double>(x[k]);
                }
                scores[c] = -dot;
            }
            const std::vector<double> prob = softmax(std::move(scores));

            for (std::size_t c = 0; c < n_classes; ++c) {
                const double g = (c == static_cast<std::size_t>(label) ? 1.0 : 0.0) - prob[c];
                for (std::size_t k = 0; k < dim; ++k) {
                    model.weights[c][k] -=
                        eta * (g * static_cast<double>(x[k]) + config.l2 * model.weights[c][k]);
                }
                model.bias[c] -= eta * g;
            }
        }
    }
    return model;
}

std::vector<double> lr_predict(const LogisticModel& model, const FeatureVec& x) {
    if (x.size() != model.dimension()) {
        throw RejectedInputError("lr_predict: feature dimension mismatch");
    }
    std::vector<double> scores(model.classes.size(), 0.0);
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
        double dot = model.bias[c];
        for (std::size_t k = 0; k < x.size(); ++k) {
            dot += model.weights[c][k] * static_cast<double>(x[k]);
        }
        scores[c] = -dot;
    }
    return softmax(std::move(scores));
}

PoissonModel poisson_fit(const Dataset& data, double eps) {
    data.validate();
    const auto groups = group_by_class(data);
    const std::size_t dim = data.dimension();

    PoissonModel model;
    model.classes = data.classes;
    model.eps = eps;
    for (const auto& examples : groups) {
        std::vector<double> rate(dim, 0.0);
        for (const FeatureVec& x : examples) {
            for (std::size_t k = 0; k < dim; ++k) rate[k] += static_cast<double>(x[k]);
        }
        for (double& r : rate) r = std::max(r / static_cast<double>(examples.size()), eps);
        model.rates.push_back(std::move(rate));
    }
    return model;
}

double poisson_log_likelihood(const PoissonModel& model, const FeatureVec& x, int c) {
    check_counts(x);
    const std::vector<double>& rate = model.rates.at(c);
    if (x.size() != rate.size()) throw RejectedInputError("poisson: dimension mismatch");
    double ll = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        ll += static_cast<double>(x[k]) * std::log(rate[k]) - rate[k] - log_factorial(x[k]);
    }
    return ll;
}

MultinomialModel multinomial_fit(const Dataset& data, double eps) {
    data.validate();
    const auto groups = group_by_class(data);
    const std::size_t dim = data.dimension();

    MultinomialModel model;
    model.classes = data.classes;
    model.eps = eps;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        std::vector<double> sums(dim, 0.0);
        double total = 0.0;
        for (const FeatureVec& x : groups[c]) {
            for (std::size_t k = 0; k < dim; ++k) {
                sums[k] += static_cast<double>(x[k]);
                total += static_cast<double>(x[k]);
            }
        }
        if (total <= 0.0) {
            throw InsufficientDataError("multinomial: class '" + data.classes[c] +
                                        "' has all-zero counts");
        }
        const double denom = total + eps * static_cast<double>(dim);
        for (double& s : sums) s = (s + eps) / denom;
        model.probs.push_back(std::move(sums));
    }
    return model;
}

double multinomial_log_likelihood(const MultinomialModel& model, const FeatureVec& x, int c) {
    check_counts(x);
    const std::vector<double>& theta = model.probs.at(c);
    if (x.size() != theta.size()) throw RejectedInputError("multinomial: dimension mismatch");
    std::int64_t total = 0;
    double ll = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        total += x[k];
        ll -= log_factorial(x[k]);
        if (x[k] > 0) ll += static_cast<double>(x[k]) * std::log(theta[k]);
    }
    return ll + log_factorial(total);
}

FeatureVec BehaviorModel::featurize(const Tracklet& tracklet) const {
    return featurize_tracklet(tracklet, signals, binning, augmented);
}

std::vector<double> BehaviorModel::class_log_likelihood(const FeatureVec& x) const {
    if (!fitted()) throw StateError("behavior model is not fitted");
    std::vector<double> ll(classes.size(), 0.0);
    switch (type) {
        case ModelType::logistic: {
            const std::vector<double> post = lr_predict(logistic, x);
            for (std::size_t c = 0; c < ll.size(); ++c) {
                ll[c] = std::log(std::max(post[c], 1e-300)) - std::log(priors[c]);
            }
            break;
        }
        case ModelType::poisson:
            for (std::size_t c = 0; c < ll.size(); ++c) {
                ll[c] = poisson_log_likelihood(poisson, x, static_cast<int>(c));
            }
            break;
        case ModelType::multinomial:
            for (std::size_t c = 0; c < ll.size(); ++c) {
                ll[c] = multinomial_log_likelihood(multinomial, x, static_cast<int>(c));
            }
            break;
    }
    return ll;
}

std::vector<double> BehaviorModel::posterior(const FeatureVec& x) const {
    if (type == ModelType::logistic) return lr_predict(logistic, x);
    std::vector<double> scores = class_log_likelihood(x);
    for (std::size_t c = 0; c < scores.size(); ++c) scores[c] += std::log(priors[c]);
    return softmax(std::move(scores));
}

double BehaviorModel::false_target_log_likelihood(const FeatureVec& x) const {
    if (type == ModelType::logistic) return 0.0;
    // Uniform over count vectors with the same total: 1 / C(n + K - 1, K - 1).
    const double n = static_cast<double>(std::accumulate(x.begin(), x.end(), std::int64_t{0}));
    const double k = static_cast<double>(x.size());
    return std::lgamma(n + 1.0) + std::lgamma(k) - std::lgamma(n + k);
}

int classify(const BehaviorModel& model, const FeatureVec& x) {
    if (!model.fitted()) throw StateError("classify: model is not fitted");
    std::vector<double> score;
    if (model.type == ModelType::logistic) {
        score = lr_predict(model.logistic, x);
    } else {
        score = model.class_log_likelihood(x);
        for (std::size_t c = 0; c < score.size(); ++c) score[c] += std::log(model.priors[c]);
    }
    return static_cast<int>(std::max_element(score.begin(), score.end()) - score.begin());
}

FeatureVec featurize_tracklet(const Tracklet& tracklet, const std::vector<SignalKind>& signals,
                              const std::map<SignalKind, BinningParams>& binning, bool augmented) {
    std::vector<BinnedFeature> features;
    for (SignalKind kind : signals) {
        const auto it = binning.find(kind);
        if (it == binning.end()) {
            throw RejectedConfigError(std::string("no binning params for signal '") +
                                      to_string(kind) + "'");
        }
        const BehaviorSignal sig = behavior_signal(tracklet, kind);
        const PersistenceDiagram d = morse_filtration(sig.values, augmented);
        features.push_back(bin_diagram(skew_transform(d), it->second, kind));
    }
    return feature_vector(features);
}

std::map<SignalKind, BinningParams> fit_binning(const std::vector<Tracklet>& tracklets,
                                                const std::vector<SignalKind>& signals, int rows,
                                                int cols, bool augmented) {
    std::map<SignalKind, BinningParams> out;
    for (SignalKind kind : signals) {
        std::vector<std::vector<SkewPoint>> sets;
        for (const Tracklet& t : tracklets) {
            const BehaviorSignal sig = behavior_signal(t, kind);
            sets.push_back(skew_transform(morse_filtration(sig.values, augmented)));
        }
        out[kind] = quantile_params(sets, rows, cols);
    }
    return out;
}

Dataset build_dataset(const std::vector<Tracklet>& tracklets,
                      const std::vector<SignalKind>& signals,
                      const std::map<SignalKind, BinningParams>& binning, bool augmented) {
    Dataset data;
    for (const Tracklet& t : tracklets) {
        if (!t.label) throw RejectedInputError("tracklet '" + t.id + "' has no label");
        if (std::find(data.classes.begin(), data.classes.end(), *t.label) == data.classes.end()) {
            data.classes.push_back(*t.label);
        }
    }
    std::sort(data.classes.begin(), data.classes.end());
    for (const Tracklet& t : tracklets) {
        const auto it = std::find(data.classes.begin(), data.classes.end(), *t.label);
        data.x.push_back(featurize_tracklet(t, signals, binning, augmented));
        data.y.push_back(static_cast<int>(it - data.classes.begin()));
    }
    return data;
}

}  // namespace topotrack
