#pragma once

#include <iosfwd>
#include <string>

#include "frbm/config.hpp"

namespace frbm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInternal = 1;

// Runs one mode, writing its artifacts and report.json into out_dir (created
// when missing). Throws ValidationError / NumericalError; `compare` throws
// NumericalError when a probe falls outside its tolerance.
void run_mode(const ExperimentConfig& config, const std::string& out_dir, std::ostream& log);

// Loads the config, applies overrides, runs the mode and maps errors to exit
// codes (0 ok, 2 validation, 3 numerical, 1 anything else). Messages go to err.
int run_main(const std::string& mode, const std::string& config_path, const std::string& out_dir,
             const ConfigOverrides& overrides, std::ostream& log, std::ostream& err);

}  // namespace frbm
