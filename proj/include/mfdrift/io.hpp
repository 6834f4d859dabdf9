#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfdrift/analysis.hpp"
#include "mfdrift/calibration.hpp"
#include "mfdrift/fokker_planck.hpp"
#include "mfdrift/integrator.hpp"
#include "mfdrift/stability.hpp"

namespace mfdrift {

/// Shortest round-trip decimal form ("%.17g"), locale independent.
std::string format_double(double x);

/// Columns path_id,t,region_id,n,z,g,n_buf,q_in; one row per path, record
/// and region, in that order.
void write_paths_csv(std::ostream& os, const EnsembleResult& ens);

/// Inverse of write_paths_csv. Audits are not stored in the CSV and come back
/// zeroed. Throws ConfigError with the line number on malformed input.
EnsembleResult read_paths_csv(std::istream& is);

/// Columns t,n,q_in. A file without the q_in column yields an empty q_in
/// vector, which the caller must fill (see assume_constant_inflow).
ObservationSeries read_observations_csv(std::istream& is);
void write_observations_csv(std::ostream& os, const ObservationSeries& obs);

/// bin_center,density
void write_histogram_csv(std::ostream& os, const Histogram& h);

/// n,mean_decrease,stderr,count; empty levels print "nan".
void write_hysteresis_csv(std::ostream& os, const HysteresisCurve& c);

/// x_bin,y_bin,count with the bin centers as coordinates.
void write_heatmap_csv(std::ostream& os, const Heatmap& h);

/// t,z,density for every snapshot.
void write_density_csv(std::ostream& os, const FpeSolution& sol);

/// n,z,n_buf,lv,lv1,lv2 with lv evaluated at `sigma`.
void write_lv_field_csv(std::ostream& os, const LvReport& report, double sigma);

nlohmann::json to_json(const EquilibriumPoint& e);
nlohmann::json to_json(const LvReport& report);
nlohmann::json to_json(const CalibrationResult& result);

/// Per-region audit totals and worst residuals relative to throughput.
nlohmann::json audit_summary(const EnsembleResult& ens);

/// Write text to a file, creating parent directories. Throws Error on failure.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace mfdrift
