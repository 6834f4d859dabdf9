// Statistical properties of the likelihood estimator and the calibration
// search on synthetic data. Slow: ten full calibrations on one core take
// several minutes, so these run as their own ctest entry.

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mfdrift/analysis.hpp"
#include "mfdrift/calibration.hpp"
#include "mfdrift/scenario.hpp"

using namespace mfdrift;

namespace {

constexpr std::size_t kReplicates = 20;
constexpr double kSeRatioLow = 1.4;
constexpr double kSeRatioHigh = 2.1;
constexpr std::size_t kDatasets = 10;
constexpr double kMedianRelErrorMax = 0.2;
constexpr double kMisfitFactor = 10.0;

ObservationSeries synthetic(double sigma, std::uint64_t seed)
{
    ScenarioConfig cfg = load_preset("single-polynomial");
    cfg.model.regions[0].sigma = sigma;
    cfg.sim.integration_mode = IntegrationMode::euler_on_z;
    cfg.sim.master_seed = seed;
    return observations_from_path(run_path(cfg.model, cfg.sim, 0), 0);
}

LikelihoodOptions matched_options()
{
    // 5 s records over a 0.5 s simulation step.
    LikelihoodOptions opt;
    opt.substeps = 10;
    return opt;
}

}  // namespace

TEST_CASE("tripling the particle count shrinks the replicate spread by about sqrt(3)")
{
    const RegionParams params = load_preset("single-polynomial").model.regions[0];
    const ObservationSeries obs = synthetic(0.04, 7);
    std::vector<double> sd;
    for (std::size_t n : {std::size_t{200}, std::size_t{600}}) {
        std::vector<double> ll;
        for (std::size_t r = 0; r < kReplicates; ++r) {
            LikelihoodOptions opt = matched_options();
            opt.n_particles = n;
            opt.seed = 100 + r;
            ll.push_back(log_likelihood(obs, params, 0.04, opt).log_likelihood);
        }
        sd.push_back(std::sqrt(variance(ll)));
    }
    const double ratio = sd[0] / sd[1];
    MESSAGE("replicate sd " << sd[0] << " -> " << sd[1] << ", ratio " << ratio);
    CHECK(ratio >= kSeRatioLow);
    CHECK(ratio <= kSeRatioHigh);
}

TEST_CASE("recovery over ten datasets and monotone misfit")
{
    const RegionParams params = load_preset("single-polynomial").model.regions[0];
    const double truths[] = {0.01, 0.04, 0.1};
    std::vector<double> rel_errors;
    for (std::size_t d = 0; d < kDatasets; ++d) {
        const double truth = truths[d % 3];
        const ObservationSeries obs = synthetic(truth, 1000 + d);
        const LikelihoodOptions opt = matched_options();
        const CalibrationResult res = calibrate(obs, params, SwarmSettings{}, opt);
        const double ll_true = log_likelihood(obs, params, truth, opt).log_likelihood;
        const double ll_far = log_likelihood(obs, params, kMisfitFactor * truth, opt).log_likelihood;
        rel_errors.push_back(std::fabs(res.sigma_star - truth) / truth);
        MESSAGE("dataset " << d << ": truth " << truth << ", sigma* " << res.sigma_star
                           << ", LL(truth) " << ll_true << ", LL(10 truth) " << ll_far);
        CHECK(ll_true > ll_far);
    }
    std::sort(rel_errors.begin(), rel_errors.end());
    const double median = 0.5 * (rel_errors[kDatasets / 2 - 1] + rel_errors[kDatasets / 2]);
    MESSAGE("median relative error " << median);
    CHECK(median <= kMedianRelErrorMax);
}
