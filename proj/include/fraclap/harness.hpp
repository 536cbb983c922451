#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraclap/asymptotics.hpp"
#include "fraclap/basis.hpp"
#include "fraclap/constants.hpp"
#include "fraclap/reduced.hpp"

namespace fraclap {

// Domain description shared by every subcommand.
//   interval  (-1, 1)        square  (-1, 1)^2        cube  (-1, 1)^3
//   mask:PATH raster file    dumbbell (uses k, lobe, neck, h)
struct DomainSpec {
  std::string name = "interval";
  int nodes = 1023;  // interior nodes per axis for boxes
  int k = 2;
  double lobe = 1.0;
  double neck = 0.25;
  double h = 1.0 / 16;
};

SpectralBasis make_basis(const DomainSpec& d, const BasisOptions& opts = {});

// "0.2,0.1,0.05" -> values; throws ConfigError on anything malformed.
std::vector<double> parse_list(const std::string& text);
// "x,y" -> point with the given dimension.
Point parse_point(const std::string& text, int dim);

nlohmann::json to_json(const ConstantSet& k);
nlohmann::json to_json(const SolveReport& r, bool with_field = false);
nlohmann::json to_json(const ReducedConfig& c, int dim);
nlohmann::json to_json(const RateFit& f);

void write_sweep_csv(std::ostream& out, const SweepTable& t);
void write_field_csv(std::ostream& out, const DomainGrid& g, const Vec& u, const std::string& name = "u");

// Entry point of the command line tool. Returns the process exit status:
// 0 success, 1 numerical failure, 2 usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fraclap
