#pragma once

#include <string>

#include "json.hpp"
#include "weakdesc/harness.hpp"

namespace weakdesc::harness {

// One record per trial, fields in a fixed order.
nlohmann::ordered_json to_json(const TrialResult& r);
nlohmann::ordered_json to_json(const WraparoundSummary& s);

std::string csv_header();
std::string csv_row(const TrialResult& r);
std::string wraparound_csv_header();
std::string wraparound_csv_row(const WraparoundSummary& s);

}  // namespace weakdesc::harness
