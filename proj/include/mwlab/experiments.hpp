#ifndef MWLAB_EXPERIMENTS_HPP
#define MWLAB_EXPERIMENTS_HPP

#include <string>

#include "mwlab/bmo.hpp"
#include "mwlab/json_io.hpp"
#include "mwlab/rng.hpp"

namespace mwlab {

struct ExperimentConfig {
    std::uint64_t seed = 1;
    double p = 2.0;
    double q = 2.0;
    int d = 1;
    int n = 1, m = 1;
    int depth = 3;
    int depth2 = 0;  // > 0 selects a bi-parameter grid
    int trials = 10;
    int sequence_len = 4;  // K <= 16
    int support = 6;       // symbol support size for duality/paraproducts
    double cap = 16.0;     // characteristic sweep ceiling
    std::string weight_model = "rotated_diag";
    CubeFamily family = CubeFamily::dyadic;
    std::string out;

    Grid grid() const {
        return depth2 > 0 ? biparameter(n, depth, m, depth2) : one_parameter(n, depth);
    }
};

void validate(const ExperimentConfig& c);
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& c);

// deterministic weight models; the characteristic is swept below `cap`
MatrixWeightField gen_weight(const ExperimentConfig& c, std::uint64_t seed);

struct ExperimentReport {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string csv() const;  // header row + RFC-4180 quoting
    void save(const std::string& path) const;
};

std::string format_double(double v);

ExperimentReport run_fs_experiment(const ExperimentConfig& c);
ExperimentReport run_duality_experiment(const ExperimentConfig& c);
ExperimentReport run_paraproduct_experiment(const ExperimentConfig& c);

// instance generators shared with the drivers (used by tests and calibration)
AtomField random_vector_field(Rng& rng, const Grid& g, int d);
SymbolSpectrum random_sparse_symbol(Rng& rng, const Grid& g, int d, int support);

} // namespace mwlab

#endif
