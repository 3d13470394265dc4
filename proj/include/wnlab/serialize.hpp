#pragma once

#include "wnlab/bandwidths.hpp"
#include "wnlab/kernels.hpp"
#include "wnlab/nikolskii.hpp"
#include "wnlab/rates.hpp"
#include "wnlab/risk.hpp"
#include "wnlab/selection.hpp"
#include "wnlab/testbed.hpp"

#include "json.hpp"

namespace wnlab {

using json = nlohmann::ordered_json;

//! numbers with infinities spelled "inf" / "-inf"
json num(double x);
double num_from(const json& j);

json to_json(const ProductKernel& K);
json to_json(const BandwidthField& h);
BandwidthField bandwidth_field_from_json(const Grid& grid, const json& j);
json to_json(const ClassSpec& theta);
ClassSpec class_spec_from_json(const json& j);
json to_json(const RateProfile& pr);
json to_json(const SelectionResult& s);
json to_json(const MembershipReport& m);
json to_json(const VgCertificate& c);
json to_json(const BumpFamily& fam);
json to_json(const UpperFunctionReport& r);
json to_json(const RiskReport& r);

//! 64-bit FNV-1a of the bytes, as 16 hex digits
std::string fnv1a_hex(const std::string& bytes);

} // namespace wnlab
