#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qpr/alphatron.hpp"
#include "qpr/kernel.hpp"
#include "qpr/observables.hpp"
#include "qpr/pauli.hpp"
#include "qpr/statevec.hpp"

namespace qpr {

struct GridAxis {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    int count = 1;
    std::vector<double> values() const;
};

// One training line: every non-swept external parameter pinned, one axis
// swept uniformly.
struct TrainingLine {
    std::map<std::string, double> fixed;
    GridAxis axis;
};

struct TrainingSpec {
    std::string type = "lines";  // lines | random
    int count = 0;               // random draw count (1D models)
    double interval_lo = 0.0;
    double interval_hi = 0.0;
    std::vector<TrainingLine> lines;
};

struct KernelSpec {
    std::string mode = "exact";  // exact | estimated
    double multiplier = 1.0;     // scales the N^{5/2} budget
};

struct QkaSpec {
    double lambda = 1.0;
    int T = 0;  // 0 -> ceil(sqrt(N / log(1/delta)))
    double delta = 0.1;
    double validation_fraction = 0.25;
    std::string selection = "validation";  // validation | test (paper-faithful)
};

struct ObservableSpec {
    std::string type = "mx";  // mx | string_order | zr
    double lo = 0.0;
    double hi = 1.0;
    double t1 = 0.5;
    double t2 = 0.5;
    int string_i = 0;
    int string_j = -1;  // -1 -> n-2
    int interval_length = 6;
};

struct ShadowSpec {
    int T = 500;
    double tau = 1.0;
    double gamma = 1.0;
    std::optional<TrainingLine> line;  // cross-section; defaults to the training lines
};

struct LanczosSpec {
    double tol = 1e-10;
    int max_iter = 500;
};

struct ExperimentConfig {
    std::string model = "xxz";  // xxz | cluster | bond_xxz | tfim
    int n = 12;
    int na = 2, nb = 5;  // tfim lattice shape (n = na*nb for tfim)
    std::map<std::string, double> couplings;  // J1, J2, J, W, pinning
    bool periodic = true;                     // xxz wrap / tfim wrap
    std::string bond_parity = "odd_j1";       // odd_j1 | even_j1
    std::vector<GridAxis> grid;
    TrainingSpec training;
    KernelSpec kernel;
    QkaSpec qka;
    ObservableSpec observable;
    ShadowSpec shadows;
    int pt_bins = 50;
    LanczosSpec lanczos;
    uint64_t seed = 42;
    std::string out_dir = "runs/out";
    int threads = 0;

    double coupling(const std::string& name, double fallback) const;
};

// Built-in reproductions of the four experiment setups.
ExperimentConfig preset_config(const std::string& name);  // xxz | spt | bond-xxz | ptdist

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig config_from_file(const std::string& path);
// Overlays a (possibly partial) JSON document onto an existing config.
void apply_json_overrides(ExperimentConfig& config, const std::string& text);
std::string config_to_json_text(const ExperimentConfig& config);

// One evaluation point of the external-parameter space; values match the
// grid axis order.
struct ParamPoint {
    std::vector<double> values;
};

std::vector<ParamPoint> make_grid(const ExperimentConfig& config);
std::vector<ParamPoint> make_training_points(const ExperimentConfig& config);
std::vector<ParamPoint> make_line_points(const std::vector<GridAxis>& grid,
                                         const TrainingLine& line);

Hamiltonian model_hamiltonian(const ExperimentConfig& config, const ParamPoint& point);

// Physics-keyed cache identity: model id, qubit count, couplings, point
// values, and solver settings. Independent of the sampling seed so reruns
// and trials share ground states.
std::string cache_key(const ExperimentConfig& config, const ParamPoint& point);
std::string cache_path(const ExperimentConfig& config, const ParamPoint& point);

// Observable value and [0,1]-encoded label at one state.
double observable_value(const ExperimentConfig& config, const StateVector& psi);
double encode_label(const ExperimentConfig& config, double value);

struct StageResult {
    int exit_code = 0;  // 0 ok, 2 config error, 3 numerical failure, 4 incomplete grid
    std::vector<std::string> files;
};

StageResult cmd_groundstate(const ExperimentConfig& config);
StageResult cmd_label(const ExperimentConfig& config);
StageResult cmd_train(const ExperimentConfig& config);
StageResult cmd_predict(const ExperimentConfig& config);
StageResult cmd_ptdist(const ExperimentConfig& config);
StageResult cmd_shadow_baseline(const ExperimentConfig& config);
StageResult cmd_report(const ExperimentConfig& config);

// Nearest-centroid classification in PCA coordinates; loo excludes the
// scored point from its class centroid (leave-one-out).
std::vector<int> nearest_centroid_classify(const Eigen::MatrixXd& coords,
                                           const std::vector<int>& labels, bool loo);

}  // namespace qpr
