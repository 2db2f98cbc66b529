#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gpslab/fock.hpp"
#include "gpslab/gps.hpp"
#include "gpslab/homodyne.hpp"
#include "gpslab/phase_space.hpp"
#include "gpslab/tomography.hpp"

// File formats. Operators: {"dim": D, "re": [...], "im": [...]} row-major,
// length D for pure states and D*D for density matrices. Doubles are written
// in shortest round-trip form.

namespace gpslab {

using Json = nlohmann::ordered_json;

// Malformed or contract-violating input; what() names the offending field.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string format_double(double v);

Json to_json(const FockState& psi);
Json to_json(const DensityOperator& rho);
FockState fock_from_json(const Json& doc);
// Accepts either layout; pure states become |psi><psi|.
DensityOperator density_from_json(const Json& doc);

Json to_json(const GpsConfig& cfg);
// Unknown keys are rejected; missing keys keep their defaults.
GpsConfig gps_config_from_json(const Json& doc);

Json to_json(const S0Fit& fit);
Json to_json(const HeraldedState& h);

Json to_json(const WignerGrid& w);
std::string wigner_csv(const WignerGrid& w);
std::string marginal_csv(const MarginalDistribution& m);

std::string dataset_csv(const HomodyneDataset& data);
HomodyneDataset parse_dataset_csv(const std::string& text);

Json to_json(const MleResult& result);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);

}  // namespace gpslab
