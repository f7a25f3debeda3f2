#pragma once

#include <string>

#include "json.hpp"

#include "ctnet/aliasing.hpp"
#include "ctnet/evalharness.hpp"

namespace ctnet {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const Json& j, const char* name);

Json to_json(const CTSystem& sys);
CTSystem ct_system_from_json(const Json& j);

Json to_json(const DTSystem& sys);
DTSystem dt_system_from_json(const Json& j);

Json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const Json& j);

Json to_json(const SolverOptions& opt);
SolverOptions solver_options_from_json(const Json& j);

Json to_json(const SolveReport& rep);
Json to_json(const SamplingBound& b);
Json to_json(const AliasTestReport& rep);
Json to_json(const AliasSet& set);
Json to_json(const BatchReport& rep);

std::string mode_to_string(EstimationMode m);
EstimationMode mode_from_string(const std::string& s);
std::string input_kind_to_string(InputKind k);
InputKind input_kind_from_string(const std::string& s);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

// CSV series: header "t,y1,..,yn[,u1,..,um]", one row per sample, printed with
// 17 significant digits so values round-trip exactly.
void write_series_csv(const std::string& path, const TimeSeries& ts);
TimeSeries read_series_csv(const std::string& path);

// Dataset directory: config.json + truth.json + series.csv.
void write_dataset(const std::string& dir, const Dataset& ds);
Dataset read_dataset(const std::string& dir);

// report.json, roc.csv, pr.csv and (optionally) roc.svg / pr.svg.
void write_batch_outputs(const std::string& dir, const BatchReport& rep, bool plots);

}  // namespace ctnet
