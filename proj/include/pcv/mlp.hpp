#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "pcv/engine.hpp"
#include "pcv/matrix.hpp"
#include "pcv/rng.hpp"

namespace pcv {

enum class Activation { relu, linear, sigmoid };
enum class LossKind { mse, bce };

struct LayerSpec {
    Index in = 0;
    Index out = 0;
    Activation act = Activation::relu;
};

struct MlpSpec {
    std::vector<LayerSpec> layers;
    LossKind loss = LossKind::mse;
    double learning_rate = 1e-3;
    int epochs = 100;
    Index batch_size = 10;
    std::uint64_t seed = 0;

    void validate() const {
        if (layers.empty()) throw ValidationError("network needs at least one layer");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            if (layers[l].in < 1 || layers[l].out < 1)
                throw ValidationError("layer " + std::to_string(l + 1) + " has empty dimension");
            if (l > 0 && layers[l].in != layers[l - 1].out)
                throw ValidationError("layer " + std::to_string(l + 1) +
                                      " input does not chain with previous output");
        }
        const Activation last = layers.back().act;
        if (loss == LossKind::bce && last != Activation::sigmoid)
            throw ValidationError("bce loss requires a sigmoid output layer");
        if (loss == LossKind::mse && last == Activation::sigmoid)
            throw ValidationError("mse loss expects a linear output layer");
        if (layers.back().out != 1)
            throw ValidationError("single-output networks only");
        if (epochs < 1 || batch_size < 1 || !(learning_rate > 0.0))
            throw ValidationError("bad training parameters");
    }

    // Convenience: dense ReLU stack from input width over hidden sizes to a
    // single output whose activation fits the loss.
    static MlpSpec dense(Index inputs, const std::vector<Index>& hidden, LossKind loss) {
        MlpSpec s;
        s.loss = loss;
        Index prev = inputs;
        for (Index h : hidden) {
            s.layers.push_back({prev, h, Activation::relu});
            prev = h;
        }
        s.layers.push_back(
            {prev, 1, loss == LossKind::bce ? Activation::sigmoid : Activation::linear});
        return s;
    }
};

namespace detail {

inline Matrix activate(const Matrix& z, Activation a) {
    switch (a) {
        case Activation::relu: return z.cwiseMax(0.0);
        case Activation::sigmoid:
            return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        case Activation::linear: break;
    }
    return z;
}

}  // namespace detail

// Dense feed-forward network; weights stored as (out x in) per layer, data
// flows through row-major batches.
struct Mlp {
    std::vector<Matrix> w;
    std::vector<Vector> b;
    std::vector<Activation> act;

    // Weights and biases drawn uniformly from +-1/sqrt(fan_in), in layer
    // order, weights (row-major) before biases. The draw order is part of
    // the determinism contract.
    static Mlp init(const MlpSpec& spec, SplitMix64& rng) {
        spec.validate();
        Mlp net;
        for (const auto& layer : spec.layers) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
            Matrix wl(layer.out, layer.in);
            for (Index r = 0; r < layer.out; ++r)
                for (Index c = 0; c < layer.in; ++c) wl(r, c) = rng.uniform(-bound, bound);
            Vector bl(layer.out);
            for (Index r = 0; r < layer.out; ++r) bl(r) = rng.uniform(-bound, bound);
            net.w.push_back(std::move(wl));
            net.b.push_back(std::move(bl));
            net.act.push_back(layer.act);
        }
        return net;
    }

    Matrix forward(const Matrix& x) const {
        Matrix h = x;
        for (std::size_t l = 0; l < w.size(); ++l)
            h = detail::activate((h * w[l].transpose()).rowwise() + b[l].transpose(), act[l]);
        return h;
    }

    Vector predict(const Matrix& x) const { return forward(x).col(0); }
};

struct Gradients {
    std::vector<Matrix> w;
    std::vector<Vector> b;

    static Gradients zeros_like(const Mlp& net) {
        Gradients g;
        for (std::size_t l = 0; l < net.w.size(); ++l) {
            g.w.push_back(Matrix::Zero(net.w[l].rows(), net.w[l].cols()));
            g.b.push_back(Vector::Zero(net.b[l].size()));
        }
        return g;
    }
};

// Mean loss over the batch and its gradient for every parameter. The
// sigmoid+bce pair is fused at the output (dL/dz = (p - y)/N); probabilities
// are clamped away from 0 and 1 in the loss value.
inline double loss_and_gradients(const Mlp& net, LossKind loss, const Matrix& xb,
                                 const Vector& yb, Gradients& grads) {
    const std::size_t n_layers = net.w.size();
    const double n = static_cast<double>(xb.rows());
    std::vector<Matrix> inputs(n_layers);   // input to each layer
    std::vector<Matrix> zs(n_layers);       // pre-activation
    Matrix h = xb;
    for (std::size_t l = 0; l < n_layers; ++l) {
        inputs[l] = h;
        zs[l] = (h * net.w[l].transpose()).rowwise() + net.b[l].transpose();
        h = detail::activate(zs[l], net.act[l]);
    }
    const Vector pred = h.col(0);

    double loss_value = 0.0;
    Matrix delta(xb.rows(), 1);  // dL/dz at the output layer
    if (loss == LossKind::mse) {
        const Vector err = pred - yb;
        loss_value = err.squaredNorm() / n;
        delta.col(0) = 2.0 * err / n;
    } else {
        for (Index i = 0; i < pred.size(); ++i) {
            const double p = std::min(1.0 - 1e-12, std::max(1e-12, pred(i)));
            loss_value -= yb(i) * std::log(p) + (1.0 - yb(i)) * std::log(1.0 - p);
        }
        loss_value /= n;
        delta.col(0) = (pred - yb) / n;
    }
    if (net.act.back() == Activation::relu)
        delta = delta.cwiseProduct((zs.back().array() > 0.0).cast<double>().matrix());

    for (std::size_t l = n_layers; l-- > 0;) {
        grads.w[l] = delta.transpose() * inputs[l];
        grads.b[l] = delta.colwise().sum();
        if (l == 0) break;
        delta = delta * net.w[l];
        if (net.act[l - 1] == Activation::relu)
            delta = delta.cwiseProduct((zs[l - 1].array() > 0.0).cast<double>().matrix());
        else if (net.act[l - 1] == Activation::sigmoid) {
            const Matrix s = detail::activate(zs[l - 1], Activation::sigmoid);
            delta = delta.cwiseProduct(s.cwiseProduct(Matrix::Ones(s.rows(), s.cols()) - s));
        }
    }
    return loss_value;
}

// Adam with the standard defaults (beta1 0.9, beta2 0.999, eps 1e-8) and
// bias correction.
struct Adam {
    double lr;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long t = 0;
    std::vector<Matrix> mw, vw;
    std::vector<Vector> mb, vb;

    Adam(const Mlp& net, double learning_rate) : lr(learning_rate) {
        for (std::size_t l = 0; l < net.w.size(); ++l) {
            mw.push_back(Matrix::Zero(net.w[l].rows(), net.w[l].cols()));
            vw.push_back(Matrix::Zero(net.w[l].rows(), net.w[l].cols()));
            mb.push_back(Vector::Zero(net.b[l].size()));
            vb.push_back(Vector::Zero(net.b[l].size()));
        }
    }

    void step(Mlp& net, const Gradients& g) {
        ++t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t l = 0; l < net.w.size(); ++l) {
            mw[l] = beta1 * mw[l] + (1.0 - beta1) * g.w[l];
            vw[l] = beta2 * vw[l] + (1.0 - beta2) * g.w[l].cwiseProduct(g.w[l]);
            net.w[l].array() -=
                lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);
            mb[l] = beta1 * mb[l] + (1.0 - beta1) * g.b[l];
            vb[l] = beta2 * vb[l] + (1.0 - beta2) * g.b[l].cwiseProduct(g.b[l]);
            net.b[l].array() -=
                lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
        }
    }
};

struct TrainResult {
    Mlp net;
    std::vector<double> epoch_loss;
};

// Seeded init, seeded batch shuffling each epoch, Adam updates per batch.
// Deterministic given the seed; a non-finite loss aborts with DivergedLoss.
inline TrainResult mlp_train(const MlpSpec& spec, const Matrix& x, const Vector& y) {
    spec.validate();
    if (x.rows() != y.size()) throw ShapeMismatch("X rows and y length differ");
    if (x.cols() != spec.layers.front().in)
        throw ShapeMismatch("X has " + std::to_string(x.cols()) + " columns, network expects " +
                            std::to_string(spec.layers.front().in));
    SplitMix64 rng(spec.seed);
    TrainResult result;
    result.net = Mlp::init(spec, rng);
    Adam adam(result.net, spec.learning_rate);
    Gradients grads = Gradients::zeros_like(result.net);

    std::vector<long> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), 0L);
    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        shuffle(order, rng);
        double epoch_sum = 0.0;
        for (Index start = 0; start < x.rows(); start += spec.batch_size) {
            const Index len = std::min(spec.batch_size, x.rows() - start);
            Matrix xb(len, x.cols());
            Vector yb(len);
            for (Index i = 0; i < len; ++i) {
                xb.row(i) = x.row(order[static_cast<std::size_t>(start + i)]);
                yb(i) = y(order[static_cast<std::size_t>(start + i)]);
            }
            const double batch_loss = loss_and_gradients(result.net, spec.loss, xb, yb, grads);
            if (!std::isfinite(batch_loss)) throw DivergedLoss(epoch);
            adam.step(result.net, grads);
            epoch_sum += batch_loss * static_cast<double>(len);
        }
        result.epoch_loss.push_back(epoch_sum / static_cast<double>(x.rows()));
    }
    return result;
}

struct EvalMetrics {
    double rmsep = 0.0;
    double r2 = 0.0;
    double accuracy = 0.0;
};

// RMSEP and R^2 in the units of y as passed (the caller adds any centering
// offset to the predictions); accuracy thresholds sigmoid outputs at 0.5.
inline EvalMetrics evaluate(const Mlp& net, const Matrix& x, const Vector& y, Task task,
                            double y_offset = 0.0) {
    if (x.rows() != y.size()) throw ShapeMismatch("X rows and y length differ");
    const Vector pred = net.predict(x).array() + y_offset;
    EvalMetrics m;
    const Vector err = pred - y;
    m.rmsep = std::sqrt(err.squaredNorm() / static_cast<double>(y.size()));
    const double sst = (y.array() - y.mean()).matrix().squaredNorm();
    m.r2 = sst > 0.0 ? 1.0 - err.squaredNorm() / sst : 0.0;
    if (task == Task::classification) {
        long correct = 0;
        for (Index i = 0; i < pred.size(); ++i)
            correct += ((pred(i) >= 0.5) == (y(i) >= 0.5)) ? 1 : 0;
        m.accuracy = static_cast<double>(correct) / static_cast<double>(y.size());
    }
    return m;
}

}  // namespace pcv
