#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dssn/autograd.hpp"

namespace dssn {

struct GradcheckOptions {
    double step = 1e-3;
    double tolerance = 1e-4;
    // Coordinates probed per leaf; 0 probes every coordinate.
    int max_coords = 0;
};

// Compares backward() against central differences for `f`, which must build
// its graph from `leaves` (and may read their values). Non-scalar outputs are
// reduced with a fixed random projection. Returns
// max|a - n| / max(max|a|, max|n|, 1e-12) over the probed coordinates.
double gradcheck(const std::function<Var<double>()>& f, const std::vector<Var<double>>& leaves, std::mt19937_64& rng,
                 const GradcheckOptions& opts = {});

struct GradcheckSummary {
    std::string name;
    int cases = 0;
    double worst = 0;
    bool passed = false;
};

// Names of every registered check, in run order.
std::vector<std::string> gradcheck_names();

// Runs `cases` random cases of each check whose name contains `filter`.
std::vector<GradcheckSummary> run_gradcheck_suite(int cases = 20, std::uint64_t seed = 1,
                                                  const std::string& filter = "", const GradcheckOptions& opts = {});

}  // namespace dssn
