#pragma once

#include <string_view>
#include <vector>

#include "roma/psychometrics.hpp"
#include "roma/role_model.hpp"

// Data files shipped inside the library (see data/).
namespace roma::bundled {

// Raw file contents by path relative to data/, e.g. "instruments/bfi10.inst".
// Throws Error(kNotFound) for unknown paths.
std::string_view file(std::string_view path);
std::vector<std::string_view> file_names();

// Instrument names are file stems under instruments/ (bfi10, bfi44, imi_ie,
// imi_ie_10, mwms). Throws Error(kUnknownInstrument).
const psychometrics::InstrumentDefinition& instrument(std::string_view name);
std::vector<std::string_view> instrument_names();

const role_model::RoleEffectModel& effect_model();

}  // namespace roma::bundled
