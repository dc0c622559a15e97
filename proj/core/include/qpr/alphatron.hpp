#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpr/kernel.hpp"

namespace qpr {

// Trained kernel Alphatron: dual coefficients at the selected iteration r,
// plus the full per-iteration risk traces for reporting.
struct QKAModel {
    Eigen::VectorXd alpha;  // alpha^r, length N
    int selected_iteration = 1;  // r in 1..T
    double lambda = 1.0;
    int T = 1;
    std::vector<Eigen::VectorXd> training_params;  // copies of the a_i
    std::vector<double> validation_risk;           // indexed by t-1
    std::vector<double> training_risk;             // indexed by t-1
};

// Default iteration count from the shot-budget theorem: ceil(sqrt(N /
// log(1/delta))).
int default_iterations(int N, double delta = 0.1);

// Kernel Alphatron. alpha^1 = 0; at step t the hypothesis is
// h^t(x) = sum_i alpha_i^t K(a_i, x) and every coefficient is updated
// synchronously by alpha_i += (lambda/N) (b_i - h^t(a_i)). After T steps, r
// minimizes the validation risk sum_j (h^t(x_j) - y_j)^2, ties going to the
// smallest t. k_val holds one kernel row per validation point (V x N).
QKAModel train_qka(const KernelMatrix& k_train, const Eigen::VectorXd& b, double lambda, int T,
                   const Eigen::MatrixXd& k_val, const Eigen::VectorXd& y_val,
                   std::vector<Eigen::VectorXd> training_params = {});

// h^r(x) = alpha^r . k where k is the kernel row of x against the training set.
double predict(const QKAModel& model, std::span<const double> kernel_row);

// Mean squared error.
double empirical_risk(std::span<const double> preds, std::span<const double> labels);

// Threshold decision rule: value > t1 -> C1, value < t2 -> C2, otherwise
// Reject (the middle class in three-class problems; empty when t1 == t2).
enum class PhaseClass : int { C2 = 0, Reject = 1, C1 = 2 };
PhaseClass classify(double value, double t1, double t2);
std::string phase_class_name(PhaseClass c);

// Fraction of exact matches.
double success_rate(std::span<const PhaseClass> predicted, std::span<const PhaseClass> truth);

// Closed-form baseline: solves (K + ridge I) alpha = b.
Eigen::VectorXd kernel_ridge_solve(const KernelMatrix& k, const Eigen::VectorXd& b, double ridge);

// Text format: header (N, lambda, T, r, d), then alpha values, then training
// parameter vectors.
std::string model_to_text(const QKAModel& model);
QKAModel model_from_text(const std::string& text);

}  // namespace qpr
