#include "qpr/alphatron.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "qpr/errors.hpp"

namespace qpr {

int default_iterations(int N, double delta) {
    return static_cast<int>(std::ceil(std::sqrt(N / std::log(1.0 / delta))));
}

QKAModel train_qka(const KernelMatrix& k_train, const Eigen::VectorXd& b, double lambda, int T,
                   const Eigen::MatrixXd& k_val, const Eigen::VectorXd& y_val,
                   std::vector<Eigen::VectorXd> training_params) {
    const int N = k_train.size();
    if (b.size() != N) throw SizeMismatchError("train_qka: label count != kernel size");
    if (T < 1) throw InvalidModelError("train_qka: T must be >= 1");
    if (k_val.rows() < 1) throw InvalidModelError("train_qka: validation set is empty");
    if (k_val.cols() != N) throw SizeMismatchError("train_qka: validation kernel rows != N");
    if (k_val.rows() != y_val.size())
        throw SizeMismatchError("train_qka: validation labels != validation rows");

    QKAModel model;
    model.lambda = lambda;
    model.T = T;
    model.training_params = std::move(training_params);
    model.validation_risk.reserve(T);
    model.training_risk.reserve(T);

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd best_alpha = alpha;
    double best_risk = 0.0;
    int best_t = 0;

    for (int t = 1; t <= T; ++t) {
        const Eigen::VectorXd h_train = k_train.entries * alpha;
        const Eigen::VectorXd h_val = k_val * alpha;
        const double val_risk = (h_val - y_val).squaredNorm() / y_val.size();
        const double train_risk = (h_train - b).squaredNorm() / N;
        model.validation_risk.push_back(val_risk);
        model.training_risk.push_back(train_risk);
        if (best_t == 0 || val_risk < best_risk) {
            best_risk = val_risk;
            best_t = t;
            best_alpha = alpha;
        }
        // Synchronous update; all residuals use the step-t hypothesis.
        alpha += (lambda / N) * (b - h_train);
        if (!alpha.allFinite())
            throw TrainingDivergenceError("train_qka: non-finite coefficients at t=" +
                                          std::to_string(t));
    }

    model.alpha = best_alpha;
    model.selected_iteration = best_t;
    return model;
}

double predict(const QKAModel& model, std::span<const double> kernel_row) {
    if (static_cast<Eigen::Index>(kernel_row.size()) != model.alpha.size())
        throw SizeMismatchError("predict: kernel row length != N");
    double s = 0.0;
    for (Eigen::Index i = 0; i < model.alpha.size(); ++i) s += model.alpha[i] * kernel_row[i];
    return s;
}

double empirical_risk(std::span<const double> preds, std::span<const double> labels) {
    if (preds.size() != labels.size()) throw SizeMismatchError("empirical_risk: length mismatch");
    if (preds.empty()) throw InvalidModelError("empirical_risk: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double d = preds[i] - labels[i];
        s += d * d;
    }
    return s / preds.size();
}

PhaseClass classify(double value, double t1, double t2) {
    if (t2 > t1) throw InvalidThresholdError("classify: t2 > t1");
    if (value > t1) return PhaseClass::C1;
    if (value < t2) return PhaseClass::C2;
    return PhaseClass::Reject;
}

std::string phase_class_name(PhaseClass c) {
    switch (c) {
        case PhaseClass::C1: return "c1";
        case PhaseClass::C2: return "c2";
        case PhaseClass::Reject: return "reject";
    }
    return "?";
}

double success_rate(std::span<const PhaseClass> predicted, std::span<const PhaseClass> truth) {
    if (predicted.size() != truth.size()) throw SizeMismatchError("success_rate: length mismatch");
    if (predicted.empty()) throw InvalidModelError("success_rate: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / predicted.size();
}

Eigen::VectorXd kernel_ridge_solve(const KernelMatrix& k, const Eigen::VectorXd& b, double ridge) {
    const int N = k.size();
    if (b.size() != N) throw SizeMismatchError("kernel_ridge_solve: label count != kernel size");
    if (ridge < 0.0) throw InvalidModelError("kernel_ridge_solve: ridge must be >= 0");
    Eigen::MatrixXd m = k.entries;
    m.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("kernel_ridge_solve: factorization failed");
    const Eigen::VectorXd d = ldlt.vectorD();
    if (d.minCoeff() < 1e-12 * std::max(1.0, d.maxCoeff()))
        throw SolverError("kernel_ridge_solve: singular system (rank-deficient kernel)");
    const Eigen::VectorXd alpha = ldlt.solve(b);
    if ((m * alpha - b).norm() > 1e-6 * std::max(1.0, b.norm()))
        throw SolverError("kernel_ridge_solve: singular system");
    return alpha;
}

std::string model_to_text(const QKAModel& model) {
    std::ostringstream out;
    const int d = model.training_params.empty() ? 0 : static_cast<int>(model.training_params[0].size());
    out << "N=" << model.alpha.size() << " lambda=";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", model.lambda);
    out << buf << " T=" << model.T << " r=" << model.selected_iteration << " d=" << d << "\n";
    for (Eigen::Index i = 0; i < model.alpha.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", model.alpha[i]);
        out << buf << "\n";
    }
    for (const auto& p : model.training_params) {
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", p[i]);
            out << buf << (i + 1 < p.size() ? " " : "");
        }
        out << "\n";
    }
    return out.str();
}

QKAModel model_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("model_from_text: empty input");
    int N = 0, T = 0, r = 0, d = 0;
    double lambda = 0.0;
    if (std::sscanf(line.c_str(), "N=%d lambda=%lg T=%d r=%d d=%d", &N, &lambda, &T, &r, &d) != 5)
        throw ConfigError("model_from_text: bad header: " + line);
    QKAModel model;
    model.lambda = lambda;
    model.T = T;
    model.selected_iteration = r;
    model.alpha.resize(N);
    for (int i = 0; i < N; ++i) {
        if (!std::getline(in, line)) throw ConfigError("model_from_text: truncated alphas");
        model.alpha[i] = std::stod(line);
    }
    for (int i = 0; i < N && d > 0; ++i) {
        if (!std::getline(in, line)) throw ConfigError("model_from_text: truncated params");
        std::istringstream ls(line);
        Eigen::VectorXd p(d);
        for (int j = 0; j < d; ++j) ls >> p[j];
        model.training_params.push_back(std::move(p));
    }
    return model;
}

}  // namespace qpr
