#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "qpr/alphatron.hpp"
#include "qpr/errors.hpp"

using namespace qpr;

namespace {

KernelMatrix wrap(const Eigen::MatrixXd& m) {
    KernelMatrix k;
    k.entries = m;
    return k;
}

KernelMatrix random_exact_kernel(int N, int n, uint64_t seed, std::vector<StateVector>* out = nullptr) {
    Rng rng(seed);
    std::vector<StateVector> states;
    for (int i = 0; i < N; ++i) states.push_back(testgen::random_state(n, rng));
    if (out) *out = states;
    return build_kernel_matrix(states, KernelMode::Exact, {}, 1);
}

}  // namespace

TEST_CASE("hand iteration on a single training point") {
    const KernelMatrix k = wrap(Eigen::MatrixXd::Ones(1, 1));
    Eigen::VectorXd b(1);
    b << 0.6;
    Eigen::MatrixXd k_val(1, 1);
    k_val << 1.0;
    const QKAModel model = train_qka(k, b, 1.0, 2, k_val, b);
    // alpha after step 1 is [0.6]; h^2 = 0.6 reproduces the label, so r = 2.
    CHECK(model.selected_iteration == 2);
    CHECK(model.alpha[0] == doctest::Approx(0.6));
    const double kv[1] = {1.0};
    CHECK(predict(model, kv) == doctest::Approx(0.6));
}

TEST_CASE("zero labels are a fixed point") {
    const KernelMatrix k = random_exact_kernel(6, 4, 11);
    const Eigen::VectorXd b = Eigen::VectorXd::Zero(6);
    const QKAModel model = train_qka(k, b, 1.0, 20, k.entries, b);
    CHECK(model.alpha.cwiseAbs().maxCoeff() == 0.0);
    for (double r : model.training_risk) CHECK(r == 0.0);
}

TEST_CASE("model selection dominates the first iterate") {
    Rng rng(21);
    const KernelMatrix k = random_exact_kernel(8, 5, 22);
    Eigen::VectorXd b(8);
    for (int i = 0; i < 8; ++i) b[i] = rng.uniform();
    const int t_thm = default_iterations(8, 0.1);
    const QKAModel model = train_qka(k, b, 1.0, std::max(t_thm, 10), k.entries, b);
    const double risk_at_r = model.validation_risk[model.selected_iteration - 1];
    for (double r : model.validation_risk) CHECK(risk_at_r <= r);
}

TEST_CASE("training-point self-prediction approaches the label") {
    const KernelMatrix k = random_exact_kernel(5, 4, 33);
    Eigen::VectorXd b(5);
    Rng rng(34);
    for (int i = 0; i < 5; ++i) b[i] = rng.uniform();
    const QKAModel model = train_qka(k, b, 1.0, 10, k.entries, b);
    // Gap |b_i - h^t(a_i)| shrinks monotonically over the first iterations.
    for (std::size_t t = 1; t < model.training_risk.size(); ++t)
        CHECK(model.training_risk[t] <= model.training_risk[t - 1] + 1e-12);
}

TEST_CASE("one-step contraction on N=1") {
    const double k11 = 0.8, lambda = 0.7, label = 0.9;
    const KernelMatrix k = wrap(Eigen::MatrixXd::Constant(1, 1, k11));
    Eigen::VectorXd b(1);
    b << label;
    const QKAModel model = train_qka(k, b, lambda, 12, k.entries, b);
    // |b - h^{t+1}| = |1 - lambda K11| |b - h^t| becomes risk ratio squared.
    const double contraction = std::pow(1.0 - lambda * k11, 2);
    for (std::size_t t = 1; t < model.training_risk.size(); ++t) {
        if (model.training_risk[t - 1] < 1e-30) break;
        CHECK(model.training_risk[t] ==
              doctest::Approx(contraction * model.training_risk[t - 1]).epsilon(1e-9));
    }
}

TEST_CASE("permutation equivariance") {
    const int N = 7;
    std::vector<StateVector> states;
    const KernelMatrix k = random_exact_kernel(N, 4, 44, &states);
    Eigen::VectorXd b(N);
    Rng rng(45);
    for (int i = 0; i < N; ++i) b[i] = rng.uniform();

    const std::vector<int> perm = {3, 0, 6, 1, 5, 2, 4};
    Eigen::MatrixXd kp(N, N);
    Eigen::VectorXd bp(N);
    for (int i = 0; i < N; ++i) {
        bp[i] = b[perm[i]];
        for (int j = 0; j < N; ++j) kp(i, j) = k.entries(perm[i], perm[j]);
    }

    const QKAModel m1 = train_qka(k, b, 1.0, 15, k.entries, b);
    const QKAModel m2 = train_qka(wrap(kp), bp, 1.0, 15, kp, bp);
    for (int i = 0; i < N; ++i) CHECK(m2.alpha[i] == doctest::Approx(m1.alpha[perm[i]]).epsilon(1e-12));

    // Predictions on an unseen point are unchanged.
    Rng prng(46);
    const StateVector probe = testgen::random_state(4, prng);
    std::vector<double> row(N), rowp(N);
    for (int i = 0; i < N; ++i) row[i] = exact_kernel(states[i], probe);
    for (int i = 0; i < N; ++i) rowp[i] = row[perm[i]];
    CHECK(predict(m2, rowp) == doctest::Approx(predict(m1, row)).epsilon(1e-12));
}

TEST_CASE("training is bit-reproducible") {
    const KernelMatrix k = random_exact_kernel(6, 4, 55);
    Eigen::VectorXd b(6);
    Rng rng(56);
    for (int i = 0; i < 6; ++i) b[i] = rng.uniform();
    const QKAModel m1 = train_qka(k, b, 1.0, 25, k.entries, b);
    const QKAModel m2 = train_qka(k, b, 1.0, 25, k.entries, b);
    CHECK(m1.alpha == m2.alpha);
    CHECK(m1.selected_iteration == m2.selected_iteration);
}

TEST_CASE("prediction basics") {
    QKAModel model;
    model.alpha = Eigen::VectorXd::Zero(3);
    const std::vector<double> row = {0.3, 0.9, 0.1};
    CHECK(predict(model, row) == 0.0);

    model.alpha << 0.0, 2.5, 0.0;
    const std::vector<double> onehot = {0.0, 1.0, 0.0};
    CHECK(predict(model, onehot) == doctest::Approx(2.5));

    const std::vector<double> wrong = {1.0, 2.0};
    CHECK_THROWS_AS(predict(model, wrong), SizeMismatchError);
}

TEST_CASE("empirical risk") {
    const std::vector<double> labels = {0.2, 0.5, 0.9};
    CHECK(empirical_risk(labels, labels) == 0.0);
    const std::vector<double> shifted = {0.3, 0.6, 1.0};
    CHECK(empirical_risk(shifted, labels) == doctest::Approx(0.01));
    const std::vector<double> zeros = {0.0, 0.0, 0.0};
    const std::vector<double> halves = {0.5, 0.5, 0.5};
    CHECK(empirical_risk(zeros, halves) == doctest::Approx(0.25));
}

TEST_CASE("threshold classification") {
    CHECK(classify(0.9, 0.5, 0.5) == PhaseClass::C1);
    CHECK(classify(0.1, 0.5, 0.5) == PhaseClass::C2);
    CHECK(classify(0.5, 0.6, 0.4) == PhaseClass::Reject);
    CHECK_THROWS_AS(classify(0.5, 0.4, 0.6), InvalidThresholdError);
}

TEST_CASE("success rate reproduces the reported accuracies") {
    // 61 mismatches of 4096 (SPT experiment) and 59 of 900 (bond XXZ).
    std::vector<PhaseClass> truth(4096, PhaseClass::C1), pred(4096, PhaseClass::C1);
    for (int i = 0; i < 61; ++i) pred[i] = PhaseClass::C2;
    CHECK(success_rate(pred, truth) == doctest::Approx(0.985107421875).epsilon(1e-12));

    std::vector<PhaseClass> t2(900, PhaseClass::C2), p2(900, PhaseClass::C2);
    for (int i = 0; i < 59; ++i) p2[i] = PhaseClass::Reject;
    CHECK(success_rate(p2, t2) == doctest::Approx(1.0 - 59.0 / 900.0).epsilon(1e-12));

    CHECK(success_rate(truth, truth) == 1.0);
    const std::vector<PhaseClass> empty;
    CHECK_THROWS_AS(success_rate(empty, empty), InvalidModelError);
}

TEST_CASE("kernel ridge baseline") {
    const KernelMatrix eye = wrap(Eigen::MatrixXd::Identity(3, 3));
    Eigen::VectorXd b(3);
    b << 0.1, 0.7, 0.4;
    CHECK((kernel_ridge_solve(eye, b, 0.0) - b).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
    Eigen::VectorXd b2(2);
    b2 << 1.0, 1.0;
    const Eigen::VectorXd alpha = kernel_ridge_solve(wrap(ones), b2, 1e-6);
    CHECK(alpha[0] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(alpha[1] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK_THROWS_AS(kernel_ridge_solve(wrap(ones), b2, 0.0), SolverError);

    // Interpolating ridge solution bounds the QKA training risk from below.
    const KernelMatrix k = random_exact_kernel(10, 5, 66);
    Eigen::VectorXd labels(10);
    Rng rng(67);
    for (int i = 0; i < 10; ++i) labels[i] = rng.uniform();
    const Eigen::VectorXd ridge_alpha = kernel_ridge_solve(k, labels, 1e-10);
    const double ridge_risk = (k.entries * ridge_alpha - labels).squaredNorm() / 10;
    const QKAModel qka = train_qka(k, labels, 1.0, 50, k.entries, labels);
    const double qka_risk = qka.training_risk[qka.selected_iteration - 1];
    CHECK(ridge_risk <= qka_risk + 1e-9);
}

TEST_CASE("model text round trip") {
    const KernelMatrix k = random_exact_kernel(4, 3, 77);
    Eigen::VectorXd b(4);
    b << 0.2, 0.4, 0.6, 0.8;
    std::vector<Eigen::VectorXd> params;
    for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd p(2);
        p << 0.1 * i, 1.0 - 0.1 * i;
        params.push_back(p);
    }
    const QKAModel model = train_qka(k, b, 1.0, 9, k.entries, b, params);
    const QKAModel back = model_from_text(model_to_text(model));
    CHECK(back.alpha == model.alpha);
    CHECK(back.selected_iteration == model.selected_iteration);
    CHECK(back.T == model.T);
    CHECK(back.lambda == model.lambda);
    REQUIRE(back.training_params.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(back.training_params[i] == model.training_params[i]);
}

TEST_CASE("default iteration count follows the theorem") {
    CHECK(default_iterations(10, 0.1) == static_cast<int>(std::ceil(std::sqrt(10 / std::log(10.0)))));
    CHECK(default_iterations(40, 0.1) >= 1);
}
