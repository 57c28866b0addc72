#include <catch2/catch.hpp>

#include "helpers.hpp"
#include "pcv/mlp.hpp"

using namespace pcv;
using pcv::testing::random_matrix;
using pcv::testing::random_vector;

TEST_CASE("a linear network drives training error to zero on linear data", "[mlp]") {
    SplitMix64 rng(137);
    Matrix x = random_matrix(40, 3, rng);
    Vector w_true = random_vector(3, rng);
    Vector y = x * w_true;
    y.array() += 0.7;

    MlpSpec spec;
    spec.layers = {{3, 1, Activation::linear}};
    spec.loss = LossKind::mse;
    spec.learning_rate = 0.05;
    spec.epochs = 600;
    spec.batch_size = 40;
    spec.seed = 3;
    TrainResult r = mlp_train(spec, x, y);
    CHECK(r.epoch_loss.back() < 1e-6);
}

TEST_CASE("analytic gradients match central finite differences", "[mlp]") {
    SplitMix64 rng(139);
    struct Case {
        LossKind loss;
        Activation head;
    };
    for (auto cs : {Case{LossKind::mse, Activation::linear},
                    Case{LossKind::bce, Activation::sigmoid}}) {
        MlpSpec spec;
        spec.layers = {{4, 5, Activation::relu}, {5, 3, Activation::relu}, {3, 1, cs.head}};
        spec.loss = cs.loss;
        SplitMix64 init_rng(7);
        Mlp net = Mlp::init(spec, init_rng);
        Matrix x = random_matrix(6, 4, rng);
        Vector y(6);
        if (cs.loss == LossKind::mse)
            y = random_vector(6, rng);
        else
            for (Index i = 0; i < 6; ++i) y(i) = static_cast<double>(rng.below(2));

        Gradients g = Gradients::zeros_like(net);
        loss_and_gradients(net, spec.loss, x, y, g);

        const double eps = 1e-6;
        auto numeric = [&](double* p) {
            const double saved = *p;
            Gradients scratch = Gradients::zeros_like(net);
            *p = saved + eps;
            const double up = loss_and_gradients(net, spec.loss, x, y, scratch);
            *p = saved - eps;
            const double down = loss_and_gradients(net, spec.loss, x, y, scratch);
            *p = saved;
            return (up - down) / (2 * eps);
        };
        double worst = 0.0;
        for (std::size_t l = 0; l < net.w.size(); ++l) {
            for (Index i = 0; i < net.w[l].size(); ++i) {
                const double num = numeric(net.w[l].data() + i);
                const double ana = g.w[l].data()[i];
                worst = std::max(worst, std::abs(num - ana) /
                                            std::max(1e-8, std::abs(num) + std::abs(ana)));
            }
            for (Index i = 0; i < net.b[l].size(); ++i) {
                const double num = numeric(net.b[l].data() + i);
                const double ana = g.b[l].data()[i];
                worst = std::max(worst, std::abs(num - ana) /
                                            std::max(1e-8, std::abs(num) + std::abs(ana)));
            }
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("adam reaches the minimum of a quadratic bowl", "[mlp]") {
    // mean squared loss of a 1-layer net on this data is an axis-aligned
    // bowl with curvatures 2 and 0.5 and minimum at w*
    Matrix x(2, 2);
    x << std::sqrt(2.0), 0, 0, std::sqrt(0.5);
    Eigen::RowVector2d w_star(1.25, -0.75);
    Vector y = x * w_star.transpose();

    MlpSpec spec;
    spec.layers = {{2, 1, Activation::linear}};
    spec.loss = LossKind::mse;
    Mlp net;
    net.w = {Matrix::Zero(1, 2)};
    net.b = {Vector::Zero(1)};
    net.act = {Activation::linear};
    // pin the bias so the bowl is exactly two-dimensional
    Adam adam(net, 0.01);
    Gradients g = Gradients::zeros_like(net);
    int steps = 0;
    for (; steps < 5000; ++steps) {
        loss_and_gradients(net, spec.loss, x, y, g);
        g.b[0].setZero();
        adam.step(net, g);
        if ((net.w[0] - Matrix(w_star)).cwiseAbs().maxCoeff() < 1e-3) break;
    }
    CHECK(steps < 5000);
    CHECK((net.w[0] - Matrix(w_star)).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("evaluation metrics", "[mlp]") {
    SplitMix64 rng(149);
    // perfect predictor
    Matrix x(4, 1);
    x << 1, 2, 3, 4;
    Vector y = 2.0 * x.col(0);
    Mlp perfect;
    perfect.w = {Matrix::Constant(1, 1, 2.0)};
    perfect.b = {Vector::Zero(1)};
    perfect.act = {Activation::linear};
    EvalMetrics m = evaluate(perfect, x, y, Task::regression);
    CHECK(m.rmsep == 0.0);
    CHECK(m.r2 == 1.0);

    // constant mean predictor has zero r2
    Mlp constant;
    constant.w = {Matrix::Zero(1, 1)};
    constant.b = {Vector::Constant(1, y.mean())};
    constant.act = {Activation::linear};
    EvalMetrics mc = evaluate(constant, x, y, Task::regression);
    CHECK(mc.r2 == Approx(0.0).margin(1e-15));

    // hand-computed formulas on a random case
    Vector noise = random_vector(4, rng);
    Mlp shifted = perfect;
    shifted.b[0](0) = 0.5;
    EvalMetrics mr = evaluate(shifted, x, y, Task::regression);
    const Vector pred = shifted.predict(x);
    double sse = 0.0, sst = 0.0;
    for (Index i = 0; i < 4; ++i) {
        sse += (pred(i) - y(i)) * (pred(i) - y(i));
        sst += (y(i) - y.mean()) * (y(i) - y.mean());
    }
    CHECK(std::abs(mr.rmsep - std::sqrt(sse / 4)) <= 1e-12);
    CHECK(std::abs(mr.r2 - (1.0 - sse / sst)) <= 1e-12);

    // classification accuracy with the 0.5 threshold
    Matrix xc(4, 1);
    xc << -2, -1, 1, 2;
    Vector yc(4);
    yc << 0, 1, 0, 1;
    Mlp sig;
    sig.w = {Matrix::Constant(1, 1, 3.0)};
    sig.b = {Vector::Zero(1)};
    sig.act = {Activation::sigmoid};
    EvalMetrics ma = evaluate(sig, xc, yc, Task::classification);
    CHECK(ma.accuracy == Approx(0.5));  // predicts 0,0,1,1
}

TEST_CASE("training is bit-deterministic given the seed", "[mlp]") {
    SplitMix64 rng(151);
    Matrix x = random_matrix(30, 4, rng);
    Vector y = x * random_vector(4, rng) + 0.1 * random_vector(30, rng);
    MlpSpec spec;
    spec.layers = {{4, 6, Activation::relu}, {6, 1, Activation::linear}};
    spec.loss = LossKind::mse;
    spec.learning_rate = 1e-3;
    spec.epochs = 20;
    spec.batch_size = 7;
    spec.seed = 12345;
    TrainResult a = mlp_train(spec, x, y);
    TrainResult b = mlp_train(spec, x, y);
    CHECK(a.epoch_loss == b.epoch_loss);
    for (std::size_t l = 0; l < a.net.w.size(); ++l) {
        CHECK((a.net.w[l] - b.net.w[l]).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.net.b[l] - b.net.b[l]).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("loss is non-increasing on a full-batch convex problem", "[mlp]") {
    SplitMix64 rng(157);
    Matrix x = random_matrix(25, 3, rng);
    Vector y = x * random_vector(3, rng);
    MlpSpec spec;
    spec.layers = {{3, 1, Activation::linear}};
    spec.loss = LossKind::mse;
    spec.learning_rate = 1e-4;
    spec.epochs = 120;
    spec.batch_size = 25;  // full batch, no shuffle noise in the loss path
    spec.seed = 5;
    TrainResult r = mlp_train(spec, x, y);
    for (std::size_t e = 1; e < r.epoch_loss.size(); ++e)
        CHECK(r.epoch_loss[e] <= r.epoch_loss[e - 1] + 1e-12);
}

TEST_CASE("a diverging loss is reported", "[mlp]") {
    SplitMix64 rng(163);
    Matrix x = random_matrix(20, 3, rng) * 10.0;
    Vector y = random_vector(20, rng) * 100.0;
    MlpSpec spec;
    spec.layers = {{3, 4, Activation::relu}, {4, 1, Activation::linear}};
    spec.loss = LossKind::mse;
    // Adam's normalized steps bound parameter growth by lr per step, so the
    // rate must be extreme enough for the squared error to overflow
    spec.learning_rate = 1e80;
    spec.epochs = 50;
    spec.batch_size = 5;
    spec.seed = 2;
    CHECK_THROWS_AS(mlp_train(spec, x, y), DivergedLoss);
}

TEST_CASE("network specs are validated", "[mlp]") {
    MlpSpec broken;
    broken.layers = {{3, 4, Activation::relu}, {5, 1, Activation::linear}};
    CHECK_THROWS_AS(broken.validate(), ValidationError);
    MlpSpec badloss;
    badloss.layers = {{3, 1, Activation::linear}};
    badloss.loss = LossKind::bce;
    CHECK_THROWS_AS(badloss.validate(), ValidationError);
    MlpSpec badhead;
    badhead.layers = {{3, 1, Activation::sigmoid}};
    badhead.loss = LossKind::mse;
    CHECK_THROWS_AS(badhead.validate(), ValidationError);
}
