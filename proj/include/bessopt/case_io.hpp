#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bessopt/grid.hpp"

namespace bessopt::grid {

/// Parses a case document (`base_mva`, `freq_hz`, `buses`, `branches`,
/// `generators`, `loads`, `scenarios`). Throws ConfigError naming the field.
PowerSystemCase case_from_json(const nlohmann::json& doc);
nlohmann::json case_to_json(const PowerSystemCase& c);

Scenario scenario_from_json(const nlohmann::json& doc, const std::string& where);
nlohmann::json scenario_to_json(const Scenario& s);

PowerSystemCase load_case_file(const std::filesystem::path& path);
void save_case_file(const PowerSystemCase& c, const std::filesystem::path& path);

} // namespace bessopt::grid

namespace bessopt::jsonutil {

/// Reads a whole JSON file; parse errors are rethrown as ConfigError with a line number.
nlohmann::json read_file(const std::filesystem::path& path);

double number(const nlohmann::json& obj, const char* key, const std::string& where);
double number_or(const nlohmann::json& obj, const char* key, double fallback, const std::string& where);
int integer(const nlohmann::json& obj, const char* key, const std::string& where);
int integer_or(const nlohmann::json& obj, const char* key, int fallback, const std::string& where);
std::string string_or(const nlohmann::json& obj, const char* key, const std::string& fallback,
                      const std::string& where);
const nlohmann::json& member(const nlohmann::json& obj, const char* key, const std::string& where);

} // namespace bessopt::jsonutil
