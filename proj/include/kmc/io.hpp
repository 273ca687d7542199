#pragma once

#include <map>
#include <string>
#include <vector>

#include "kmc/compress.hpp"
#include "kmc/counterexample.hpp"
#include "kmc/learn.hpp"
#include "kmc/spectral.hpp"

namespace kmc {

inline constexpr const char* kVersion = "0.1.0";

// FNV-1a over a file's bytes, hex-encoded. Used for input checksums in run
// manifests.
std::string file_checksum(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Coreset JSON: {"indices":[...],"weights":[...],"kernel":{...},"n_source":N}
// with "centers" replacing indices for atom coresets.
std::string coreset_to_json(const Coreset& c, const std::string& kernel_config);
Coreset coreset_from_json(const std::string& text, std::string* kernel_config_out);

std::string spectral_report_to_json(const SpectralReport& rep);
std::string ball_report_to_json(const BallReport& rep);
std::string mmd_result_to_json(const MMDResult& res);
std::string regressor_to_json(const Regressor& reg, const std::vector<double>& predictions);
std::string invariant_report_to_json(const cx::InvariantReport& rep,
                                     const cx::DivergenceReport& div);
std::string measure_report_to_json(const cx::MeasureReport& rep);

// manifest.json: subcommand, config key/values, version, input checksums.
void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const std::map<std::string, std::string>& config,
                    const std::vector<std::string>& input_paths);

bool ensure_directory(const std::string& path);

}  // namespace kmc
