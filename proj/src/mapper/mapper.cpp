#include "mbfs/mapper/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "mbfs/error.hpp"

namespace mbfs::mapper {
namespace {

double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }
double sigmoid(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

double clamp_log_variance(double raw) { return std::clamp(raw, kLogVarianceMin, kLogVarianceMax); }
double clamp_slope(double raw) { return raw >= kLogVarianceMin && raw <= kLogVarianceMax ? 1.0 : 0.0; }

// Log-likelihood of the head-space target t given raw head outputs, and its
// gradient with respect to those outputs.
double raw_log_likelihood(HeadKind kind, const double* out, double t, double* grad) {
    if (kind == HeadKind::gaussian) {
        const double lv = clamp_log_variance(out[1]);
        const double inv = std::exp(-lv);
        const double r = t - out[0];
        grad[0] = r * inv;
        grad[1] = (-0.5 + 0.5 * r * r * inv) * clamp_slope(out[1]);
        return -0.5 * (std::log(2.0 * std::numbers::pi) + lv) - 0.5 * r * r * inv;
    }
    const double a = out[0];
    grad[0] = t - sigmoid(a);
    return t * a - softplus(a);
}

// Jeffreys divergence between two raw head outputs, with gradients.
double raw_jeffreys(HeadKind kind, const double* a, const double* b, double* ga, double* gb) {
    if (kind == HeadKind::gaussian) {
        const double la = clamp_log_variance(a[1]);
        const double lb = clamp_log_variance(b[1]);
        const double ia = std::exp(-la);
        const double ib = std::exp(-lb);
        const double ratio = std::exp(la - lb);
        const double delta = a[0] - b[0];
        ga[0] = 0.5 * delta * (ia + ib);
        gb[0] = -ga[0];
        ga[1] = (0.25 * (ratio - 1.0 / ratio) - 0.25 * delta * delta * ia) * clamp_slope(a[1]);
        gb[1] = (0.25 * (1.0 / ratio - ratio) - 0.25 * delta * delta * ib) * clamp_slope(b[1]);
        return 0.25 * (ratio + 1.0 / ratio - 2.0) + 0.25 * delta * delta * (ia + ib);
    }
    const double pa = sigmoid(a[0]);
    const double pb = sigmoid(b[0]);
    const double dl = a[0] - b[0];
    ga[0] = 0.5 * (pa * (1.0 - pa) * dl + (pa - pb));
    gb[0] = 0.5 * (-pb * (1.0 - pb) * dl - (pa - pb));
    return 0.5 * (pa - pb) * dl;
}

Matrix standardized_rows(const Standardizer& norm, const SampleBlock& x, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(x.d()));
    for (std::size_t b = 0; b < rows.size(); ++b) {
        for (std::size_t c = 0; c < x.d(); ++c) {
            out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(c)) =
                (x(rows[b], c) - norm.mean[c]) / norm.scale[c];
        }
    }
    return out;
}

double head_target(const MappingModel& model, double y) {
    return model.head_kind == HeadKind::gaussian ? (y - model.y_mean) / model.y_scale : y;
}

HeadParams params_from_raw(const MappingModel& model, const double* out) {
    if (model.head_kind == HeadKind::bernoulli) return bernoulli_params(out[0]);
    HeadParams p;
    p.kind = HeadKind::gaussian;
    p.mean = model.y_mean + model.y_scale * out[0];
    p.log_variance = clamp_log_variance(out[1]) + 2.0 * std::log(model.y_scale);
    return p;
}

void check_feature_dims(const MappingModel& model, const Dataset& data) {
    data.validate();
    if (data.feature_dims() != model.feature_dims) {
        throw Error(ErrorKind::dimension_mismatch, "dataset feature widths do not match the mapping model");
    }
}

}  // namespace

std::string to_string(HeadKind kind) { return kind == HeadKind::gaussian ? "gaussian" : "bernoulli"; }

HeadKind head_kind_from_string(const std::string& name) {
    if (name == "gaussian") return HeadKind::gaussian;
    if (name == "bernoulli") return HeadKind::bernoulli;
    throw Error(ErrorKind::parse_error, "unknown head kind '" + name + "'");
}

Standardizer Standardizer::identity(std::size_t d) { return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)}; }

Standardizer Standardizer::fit(const SampleBlock& block) {
    Standardizer s = identity(block.d());
    const auto n = static_cast<double>(block.n());
    for (std::size_t c = 0; c < block.d(); ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < block.n(); ++i) mean += block(i, c);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < block.n(); ++i) var += (block(i, c) - mean) * (block(i, c) - mean);
        const double sd = std::sqrt(var / n);
        s.mean[c] = mean;
        s.scale[c] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const SampleBlock& block) const {
    std::vector<std::size_t> rows(block.n());
    std::iota(rows.begin(), rows.end(), 0);
    return standardized_rows(*this, block, rows);
}

void MappingModel::validate() const {
    if (feature_dims.empty()) throw Error(ErrorKind::dimension_mismatch, "mapping model needs at least one feature");
    if (map_dim == 0) throw Error(ErrorKind::dimension_mismatch, "map dimension must be positive");
    if (map_nets.size() != m() || input_norm.size() != m()) {
        throw Error(ErrorKind::dimension_mismatch, "mapping model needs one map and one scaler per feature");
    }
    for (std::size_t i = 0; i < m(); ++i) {
        map_nets[i].validate();
        if (map_nets[i].input_dim() != feature_dims[i] || map_nets[i].output_dim() != map_dim) {
            throw Error(ErrorKind::dimension_mismatch, "map " + std::to_string(i) + " has the wrong shape");
        }
        if (input_norm[i].mean.size() != feature_dims[i] || input_norm[i].scale.size() != feature_dims[i]) {
            throw Error(ErrorKind::dimension_mismatch, "scaler " + std::to_string(i) + " has the wrong width");
        }
    }
    head_net.validate();
    if (head_net.input_dim() != head_input_dim() || head_net.output_dim() != head_output_dim()) {
        throw Error(ErrorKind::dimension_mismatch, "head network has the wrong shape");
    }
    if (!(y_scale > 0.0) || !std::isfinite(y_mean)) throw Error(ErrorKind::invalid_argument, "invalid target scaling");
}

MappingModel make_mapping_model(const ModelShape& shape, std::uint64_t seed) {
    MappingModel model;
    model.feature_dims = shape.feature_dims;
    model.map_dim = shape.map_dim;
    model.head_kind = shape.head_kind;
    model.delta = shape.delta;
    if (model.feature_dims.empty() || model.map_dim == 0) {
        throw Error(ErrorKind::dimension_mismatch, "mapping model needs features and a positive map dimension");
    }
    std::mt19937_64 rng(seed);
    for (const std::size_t d : model.feature_dims) {
        std::vector<std::size_t> dims{d};
        dims.insert(dims.end(), shape.map_hidden.begin(), shape.map_hidden.end());
        dims.push_back(model.map_dim);
        model.map_nets.push_back(nn::make_dense_net(dims, rng));
        model.input_norm.push_back(Standardizer::identity(d));
    }
    std::vector<std::size_t> dims{model.head_input_dim()};
    dims.insert(dims.end(), shape.head_hidden.begin(), shape.head_hidden.end());
    dims.push_back(model.head_output_dim());
    model.head_net = nn::make_dense_net(dims, rng);
    return model;
}

std::size_t MaskVector::popcount() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

MaskVector sample_mask(std::size_t m, std::size_t delta, std::mt19937_64& rng, std::vector<std::string>* warnings) {
    if (m == 0) throw Error(ErrorKind::invalid_argument, "mask length must be positive");
    std::size_t max_ones = delta + 1;
    if (max_ones > m) {
        if (warnings) {
            warnings->push_back("delta + 1 = " + std::to_string(max_ones) + " exceeds m = " + std::to_string(m) +
                                "; clamped to m");
        }
        max_ones = m;
    }
    std::vector<double> weights(max_ones + 1, 0.0);
    double binom = 1.0;
    for (std::size_t c = 1; c <= max_ones; ++c) {
        binom = binom * static_cast<double>(m - c + 1) / static_cast<double>(c);
        weights[c] = binom;
    }
    const auto c = std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng);
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t k = 0; k < c; ++k) {
        std::swap(idx[k], idx[k + std::uniform_int_distribution<std::size_t>(0, m - 1 - k)(rng)]);
    }
    MaskVector mask;
    mask.bits.assign(m, 0);
    for (std::size_t k = 0; k < c; ++k) mask.bits[idx[k]] = 1;
    return mask;
}

double HeadParams::variance() const { return std::exp(log_variance); }
double HeadParams::probability() const { return sigmoid(logit); }

HeadParams gaussian_params(double mean, double log_variance) {
    HeadParams p;
    p.kind = HeadKind::gaussian;
    p.mean = mean;
    p.log_variance = clamp_log_variance(log_variance);
    return p;
}

HeadParams bernoulli_params(double logit) {
    HeadParams p;
    p.kind = HeadKind::bernoulli;
    p.logit = logit;
    return p;
}

double log_likelihood(const HeadParams& params, double y) {
    if (params.kind == HeadKind::gaussian) {
        const double r = y - params.mean;
        return -0.5 * (std::log(2.0 * std::numbers::pi) + params.log_variance) -
               0.5 * r * r * std::exp(-params.log_variance);
    }
    return y * params.logit - softplus(params.logit);
}

double jeffreys(const HeadParams& a, const HeadParams& b) {
    if (a.kind != b.kind) throw Error(ErrorKind::invalid_argument, "Jeffreys divergence needs matching head kinds");
    if (a.kind == HeadKind::gaussian) {
        const double ratio = std::exp(a.log_variance - b.log_variance);
        const double delta = a.mean - b.mean;
        return 0.25 * (ratio + 1.0 / ratio - 2.0) +
               0.25 * delta * delta * (std::exp(-a.log_variance) + std::exp(-b.log_variance));
    }
    return 0.5 * (a.probability() - b.probability()) * (a.logit - b.logit);
}

SampleBlock map_feature(const MappingModel& model, std::size_t i, const SampleBlock& x) {
    if (i >= model.m()) throw Error(ErrorKind::invalid_argument, "feature index out of range");
    if (x.d() != model.feature_dims[i]) {
        throw Error(ErrorKind::dimension_mismatch, "feature " + std::to_string(i) + " expects width " +
                                                       std::to_string(model.feature_dims[i]) + ", got " +
                                                       std::to_string(x.d()));
    }
    const Matrix out = nn::forward_batch(model.map_nets[i], model.input_norm[i].apply(x));
    return SampleBlock(x.n(), model.map_dim, std::vector<double>(out.data(), out.data() + out.size()));
}

std::vector<SampleBlock> map_dataset(const MappingModel& model, const Dataset& data) {
    check_feature_dims(model, data);
    std::vector<SampleBlock> out;
    for (std::size_t i = 0; i < model.m(); ++i) out.push_back(map_feature(model, i, data.features[i]));
    return out;
}

HeadParams surrogate_forward(const MappingModel& model, const std::vector<std::vector<double>>& features,
                             const MaskVector& mask) {
    if (features.size() != model.m()) throw Error(ErrorKind::dimension_mismatch, "one input per feature is required");
    if (model.masked() && mask.bits.size() != model.m()) {
        throw Error(ErrorKind::dimension_mismatch, "mask length must equal the number of features");
    }
    const std::size_t r = model.map_dim;
    std::vector<double> h(model.head_input_dim(), 0.0);
    for (std::size_t i = 0; i < model.m(); ++i) {
        if (features[i].size() != model.feature_dims[i]) {
            throw Error(ErrorKind::dimension_mismatch, "feature " + std::to_string(i) + " has the wrong width");
        }
        const bool on = !model.masked() || mask.bits[i] != 0;
        if (model.masked()) h[model.m() * r + i] = on ? 1.0 : 0.0;
        if (!on) continue;
        std::vector<double> z(features[i].size());
        for (std::size_t c = 0; c < z.size(); ++c) {
            z[c] = (features[i][c] - model.input_norm[i].mean[c]) / model.input_norm[i].scale[c];
        }
        const auto f = nn::forward(model.map_nets[i], z);
        std::copy(f.begin(), f.end(), h.begin() + static_cast<std::ptrdiff_t>(i * r));
    }
    const auto out = nn::forward(model.head_net, h);
    return params_from_raw(model, out.data());
}

void TrainConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::invalid_argument, "lambda must be >= 0");
    if (batch_size < 2) throw Error(ErrorKind::invalid_argument, "batch size must be at least 2");
    if (!(adam.learning_rate > 0.0)) throw Error(ErrorKind::invalid_argument, "learning rate must be positive");
}

BatchPlan draw_batch_plan(const MappingModel& model, std::size_t n, std::size_t batch_size, std::size_t delta,
                          std::mt19937_64& rng) {
    BatchPlan plan;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const std::size_t B = std::min(batch_size, n);
    for (std::size_t k = 0; k < B; ++k) std::swap(all[k], all[k + std::uniform_int_distribution<std::size_t>(0, n - 1 - k)(rng)]);
    plan.rows.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(B));
    if (model.masked()) {
        for (std::size_t b = 0; b < B; ++b) plan.masks.push_back(sample_mask(model.m(), delta, rng));
    }
    for (std::size_t i = 0; i < model.m(); ++i) {
        std::vector<std::size_t> s(B);
        std::iota(s.begin(), s.end(), 0);
        std::shuffle(s.begin(), s.end(), rng);
        plan.shuffles.push_back(std::move(s));
    }
    return plan;
}

Objective evaluate_objective(const MappingModel& model, const Dataset& data, const BatchPlan& plan, double lambda,
                             Gradients* grads) {
    using Eigen::Index;
    const std::size_t m = model.m();
    const std::size_t r = model.map_dim;
    const std::size_t B = plan.rows.size();
    const std::size_t out_dim = model.head_output_dim();
    if (B == 0 || plan.shuffles.size() != m || (model.masked() && plan.masks.size() != B)) {
        throw Error(ErrorKind::dimension_mismatch, "batch plan does not match the model");
    }
    auto active = [&](std::size_t b, std::size_t i) { return !model.masked() || plan.masks[b].bits[i] != 0; };
    // Column of head input holding coordinate c of feature i.
    auto col = [&](std::size_t i, std::size_t c) { return static_cast<Index>(i * r + c); };

    std::vector<nn::ForwardCache> map_cache(m);
    std::vector<Matrix> F(m);
    for (std::size_t i = 0; i < m; ++i) {
        F[i] = nn::forward_batch(model.map_nets[i], standardized_rows(model.input_norm[i], data.features[i], plan.rows),
                                 grads ? &map_cache[i] : nullptr);
    }

    Matrix H = Matrix::Zero(static_cast<Index>(B), static_cast<Index>(model.head_input_dim()));
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t i = 0; i < m; ++i) {
            if (!active(b, i)) continue;
            for (std::size_t c = 0; c < r; ++c) H(static_cast<Index>(b), col(i, c)) = F[i](static_cast<Index>(b), static_cast<Index>(c));
            if (model.masked()) H(static_cast<Index>(b), static_cast<Index>(m * r + i)) = 1.0;
        }
    }
    nn::ForwardCache head_cache;
    const Matrix out = nn::forward_batch(model.head_net, H, grads ? &head_cache : nullptr);

    const double inv_b = 1.0 / static_cast<double>(B);
    Matrix U = Matrix::Zero(static_cast<Index>(B), static_cast<Index>(out_dim));
    double ll_sum = 0.0;
    double g[2];
    for (std::size_t b = 0; b < B; ++b) {
        ll_sum += raw_log_likelihood(model.head_kind, &out(static_cast<Index>(b), 0),
                                     head_target(model, data.y(plan.rows[b], 0)), g);
        for (std::size_t o = 0; o < out_dim; ++o) U(static_cast<Index>(b), static_cast<Index>(o)) += g[o] * inv_b;
    }

    std::vector<Matrix> dF(m);
    for (auto& d : dF) d = Matrix::Zero(static_cast<Index>(B), static_cast<Index>(r));
    if (grads) {
        grads->maps.clear();
        for (const auto& net : model.map_nets) grads->maps.push_back(nn::GradientTape::zeros_like(net));
        grads->head = nn::GradientTape::zeros_like(model.head_net);
    }

    double reg = 0.0;
    const double coef = lambda * inv_b;
    for (std::size_t i = 0; i < m && lambda > 0.0; ++i) {
        const auto& sigma = plan.shuffles[i];
        std::vector<std::size_t> rows_on;
        for (std::size_t b = 0; b < B; ++b) {
            if (active(b, i)) rows_on.push_back(b);
        }
        if (rows_on.empty()) continue;
        Matrix H2(static_cast<Index>(rows_on.size()), H.cols());
        for (std::size_t a = 0; a < rows_on.size(); ++a) {
            const auto b = static_cast<Index>(rows_on[a]);
            H2.row(static_cast<Index>(a)) = H.row(b);
            for (std::size_t c = 0; c < r; ++c) {
                H2(static_cast<Index>(a), col(i, c)) = F[i](static_cast<Index>(sigma[rows_on[a]]), static_cast<Index>(c));
            }
        }
        nn::ForwardCache cache2;
        const Matrix out2 = nn::forward_batch(model.head_net, H2, grads ? &cache2 : nullptr);
        Matrix U2 = Matrix::Zero(out2.rows(), out2.cols());
        double ga[2], gb[2];
        double term_sum = 0.0;
        for (std::size_t a = 0; a < rows_on.size(); ++a) {
            const std::size_t b = rows_on[a];
            const std::size_t sb = sigma[b];
            const double D = raw_jeffreys(model.head_kind, &out(static_cast<Index>(b), 0),
                                          &out2(static_cast<Index>(a), 0), ga, gb);
            const Eigen::RowVectorXd diff = F[i].row(static_cast<Index>(b)) - F[i].row(static_cast<Index>(sb));
            const double d = diff.squaredNorm();
            term_sum += std::abs(d - D);
            if (!grads) continue;
            const double s = d > D ? 1.0 : (d < D ? -1.0 : 0.0);
            // J -= coef |d - D|
            for (std::size_t o = 0; o < out_dim; ++o) {
                U(static_cast<Index>(b), static_cast<Index>(o)) += coef * s * ga[o];
                U2(static_cast<Index>(a), static_cast<Index>(o)) += coef * s * gb[o];
            }
            dF[i].row(static_cast<Index>(b)) -= coef * s * 2.0 * diff;
            dF[i].row(static_cast<Index>(sb)) += coef * s * 2.0 * diff;
        }
        reg += term_sum * inv_b;
        if (!grads) continue;
        Matrix G2;
        nn::backward_batch(model.head_net, cache2, U2, grads->head, &G2);
        for (std::size_t a = 0; a < rows_on.size(); ++a) {
            const std::size_t b = rows_on[a];
            for (std::size_t j = 0; j < m; ++j) {
                if (!active(b, j)) continue;
                const std::size_t target_row = j == i ? sigma[b] : b;
                for (std::size_t c = 0; c < r; ++c) {
                    dF[j](static_cast<Index>(target_row), static_cast<Index>(c)) += G2(static_cast<Index>(a), col(j, c));
                }
            }
        }
    }

    Objective obj;
    obj.log_likelihood = ll_sum * inv_b;
    if (model.head_kind == HeadKind::gaussian) obj.log_likelihood -= std::log(model.y_scale);
    obj.regularizer = reg;
    obj.value = obj.log_likelihood - lambda * reg;

    if (grads) {
        Matrix G;
        nn::backward_batch(model.head_net, head_cache, U, grads->head, &G);
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t j = 0; j < m; ++j) {
                if (!active(b, j)) continue;
                for (std::size_t c = 0; c < r; ++c) dF[j](static_cast<Index>(b), static_cast<Index>(c)) += G(static_cast<Index>(b), col(j, c));
            }
        }
        for (std::size_t i = 0; i < m; ++i) nn::backward_batch(model.map_nets[i], map_cache[i], dF[i], grads->maps[i]);
    }
    return obj;
}

TrainResult train(MappingModel model, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    check_feature_dims(model, data);
    TrainResult result;
    model.delta = cfg.delta;
    model.lambda = cfg.lambda;
    std::size_t delta = cfg.delta;
    if (model.masked() && delta + 1 > model.m()) {
        result.warnings.push_back("delta + 1 = " + std::to_string(delta + 1) + " exceeds m = " +
                                  std::to_string(model.m()) + "; masks clamped to at most m ones");
        delta = model.m() - 1;
    }
    if (model.head_kind == HeadKind::bernoulli) {
        for (double v : data.y.values()) {
            if (v != 0.0 && v != 1.0) throw Error(ErrorKind::invalid_argument, "bernoulli head needs 0/1 targets");
        }
    }
    if (cfg.standardize) {
        for (std::size_t i = 0; i < model.m(); ++i) model.input_norm[i] = Standardizer::fit(data.features[i]);
        if (model.head_kind == HeadKind::gaussian) {
            const Standardizer s = Standardizer::fit(data.y);
            model.y_mean = s.mean[0];
            model.y_scale = s.scale[0];
        }
    }

    std::mt19937_64 rng(cfg.seed);
    std::vector<nn::OptimizerState> map_opt;
    for (const auto& net : model.map_nets) map_opt.push_back(nn::OptimizerState::for_net(net, cfg.adam));
    nn::OptimizerState head_opt = nn::OptimizerState::for_net(model.head_net, cfg.adam);

    Gradients grads;
    result.history.reserve(cfg.iterations);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const BatchPlan plan = draw_batch_plan(model, data.n(), cfg.batch_size, delta, rng);
        const Objective obj = evaluate_objective(model, data, plan, cfg.lambda, &grads);
        if (!std::isfinite(obj.log_likelihood)) {
            throw Error(ErrorKind::non_finite, "iteration " + std::to_string(it) + ": log-likelihood term is not finite");
        }
        if (!std::isfinite(obj.regularizer)) {
            throw Error(ErrorKind::non_finite, "iteration " + std::to_string(it) + ": regularizer term is not finite");
        }
        try {
            for (std::size_t i = 0; i < model.m(); ++i) nn::adam_step(model.map_nets[i], grads.maps[i], map_opt[i], true);
            nn::adam_step(model.head_net, grads.head, head_opt, true);
        } catch (const Error& e) {
            throw Error(e.kind(), "iteration " + std::to_string(it) + ": " + e.what());
        }
        result.history.push_back({it, obj});
    }
    result.model = std::move(model);
    return result;
}

nlohmann::json to_json(const MappingModel& model) {
    nlohmann::json maps = nlohmann::json::array();
    for (const auto& net : model.map_nets) maps.push_back(nn::to_json(net));
    nlohmann::json norms = nlohmann::json::array();
    for (const auto& s : model.input_norm) norms.push_back({{"mean", s.mean}, {"scale", s.scale}});
    return {{"feature_dims", model.feature_dims},
            {"map_dim", model.map_dim},
            {"head_kind", to_string(model.head_kind)},
            {"delta", model.delta},
            {"lambda", model.lambda},
            {"input_norm", norms},
            {"y_mean", model.y_mean},
            {"y_scale", model.y_scale},
            {"map_nets", maps},
            {"head_net", nn::to_json(model.head_net)}};
}

MappingModel mapping_model_from_json(const nlohmann::json& doc) {
    MappingModel model;
    try {
        model.feature_dims = doc.at("feature_dims").get<std::vector<std::size_t>>();
        model.map_dim = doc.at("map_dim").get<std::size_t>();
        model.head_kind = head_kind_from_string(doc.at("head_kind").get<std::string>());
        model.delta = doc.at("delta").get<std::size_t>();
        model.lambda = doc.at("lambda").get<double>();
        model.y_mean = doc.value("y_mean", 0.0);
        model.y_scale = doc.value("y_scale", 1.0);
        for (const auto& net : doc.at("map_nets")) model.map_nets.push_back(nn::dense_net_from_json(net));
        model.head_net = nn::dense_net_from_json(doc.at("head_net"));
        if (doc.contains("input_norm")) {
            for (const auto& s : doc.at("input_norm")) {
                model.input_norm.push_back({s.at("mean").get<std::vector<double>>(), s.at("scale").get<std::vector<double>>()});
            }
        } else {
            for (const std::size_t d : model.feature_dims) model.input_norm.push_back(Standardizer::identity(d));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorKind::parse_error, std::string("invalid mapping checkpoint: ") + ex.what());
    }
    model.validate();
    return model;
}

}  // namespace mbfs::mapper
