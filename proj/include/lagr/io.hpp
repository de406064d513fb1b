#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lagr/sim.hpp"
#include "lagr/surface.hpp"

// CSV ingestion/emission and file fingerprints. Output column orders are
// fixed; floating point is emitted with 17 significant digits so files
// round-trip exactly.

namespace lagr {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index or Schema error naming the missing column.
    int column(const std::string& name, const std::string& path) const;
};

CsvTable read_csv(const std::string& path);

// 17-significant-digit representation (shortest exact form not required;
// round-trips under strtod).
std::string format_g17(double x);

struct DatasetSchema {
    std::string x_col = "u";  // first planar coordinate
    std::string y_col = "v";  // second planar coordinate
    std::string response_col = "y";
    std::vector<std::string> covariate_cols;
};

// Loads a header CSV; prepends the unpenalized intercept column. Parse
// failures carry the 1-based data row number.
Dataset load_dataset(const std::string& path, const DatasetSchema& schema);

// Inverse of load_dataset (intercept column is not emitted).
void write_dataset_csv(const std::string& path, const Dataset& dataset,
                       const DatasetSchema& schema);

// surface.csv: u,v,coefficient,estimate,gradient_u,gradient_v,active,lambda,df_hat,converged
void write_surface_csv(const std::string& path, const CoefficientSurface& surface);

// tuning_path.csv: location,u,v,lambda,df_hat,weighted_deviance,aic,selected
void write_tuning_path_csv(const std::string& path, const CoefficientSurface& surface);

// study.csv: n,rho,sigma_eps,method,coefficient,mise,zero_freq
void write_study_csv(const std::string& path, const std::vector<CellMetrics>& table);

std::uint64_t fnv1a_file(const std::string& path);

// Reads surface.csv back into per-location coefficient blocks (prediction).
struct SurfaceRow {
    Location s;
    std::vector<std::string> names;
    std::vector<Eigen::Vector3d> groups;  // estimate, gradient_u, gradient_v
};
std::vector<SurfaceRow> read_surface_csv(const std::string& path);

}  // namespace lagr
