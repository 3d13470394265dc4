#pragma once

#include "wnlab/serialize.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace wnlab {

//! Config problem located by a JSON path such as "$.grid.n".
class ValidationError : public std::invalid_argument
{
public:
  ValidationError(const std::string& path, const std::string& msg)
    : std::invalid_argument(path + ": " + msg)
    , path_(path)
  {}
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

struct ExperimentConfig
{
  json resolved;                      // every field, defaults filled in
  std::vector<std::string> defaulted; // paths of fields that took a default
};

//! validates and fills defaults; throws ValidationError
ExperimentConfig resolve_config(const json& raw);
ExperimentConfig load_config(const std::filesystem::path& file);

//! JSON schema describing the accepted configs
json config_schema();

struct RunOutputs
{
  json manifest;
  std::string csv;  // body without the header comment
  json results;
  //! extra files (name, contents) written next to the main outputs
  std::vector<std::pair<std::string, std::string>> extra;
};

RunOutputs run_experiment(const ExperimentConfig& cfg);
//! manifest.json, results.csv (with manifest hash comment), results.json, extras
void write_outputs(const std::filesystem::path& dir, const RunOutputs& out);
//! full text of results.csv
std::string results_csv_text(const RunOutputs& out);

//! fast property suite; prints one PASS/FAIL line per property
bool verify_suite(std::ostream& os, std::uint64_t seed, const UpperFunctionConfig* overrides = nullptr);

} // namespace wnlab
