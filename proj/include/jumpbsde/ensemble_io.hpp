#pragma once

#include <string>

#include "jumpbsde/path.hpp"

namespace jumpbsde {

// On-disk layout under `dir`:
//   meta.json   horizon, path count, seeds
//   paths.csv   header = base-grid times, one row of values per path
//   jumps.csv   path,time,size for every jump
//   extras.csv  path,time,value for refined grid points off the base grid
// All numbers are shortest-round-trip decimals, so read(write(e)) == e.
void write_ensemble(const PathEnsemble& ensemble, const std::string& dir);
PathEnsemble read_ensemble(const std::string& dir);

}  // namespace jumpbsde
