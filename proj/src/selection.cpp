#include "qfs/selection.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "qfs/errors.hpp"

namespace qfs {
using nlohmann::json;

std::string to_string(SolveMethod method) {
  switch (method) {
    case SolveMethod::Qa: return "qa";
    case SolveMethod::Sa: return "sa";
    case SolveMethod::Exact: return "exact";
  }
  return "exact";
}

SolveMethod solve_method_from_string(const std::string& text) {
  if (text == "qa") return SolveMethod::Qa;
  if (text == "sa") return SolveMethod::Sa;
  if (text == "exact") return SolveMethod::Exact;
  throw std::invalid_argument("unknown solve method '" + text + "'");
}

std::string to_json_line(const SelectionResult& r) {
  json hist = json::object();
  for (const auto& [bits, count] : r.histogram) hist[to_string(bits)] = count;
  json j = {{"image_id", r.image_id},
            {"class", r.class_label},
            {"method", to_string(r.method)},
            {"bitstring", to_string(r.bitstring)},
            {"selected_fm_indices", r.selected_fm_indices},
            {"energy", r.energy},
            {"n_shots", r.n_shots},
            {"histogram", hist}};
  if (r.fidelity) j["fidelity"] = *r.fidelity;
  if (r.degeneracy) j["degeneracy"] = *r.degeneracy;
  if (!r.note.empty()) j["note"] = r.note;
  return j.dump();
}

SelectionResult selection_from_json_line(const std::string& line) {
  try {
    const auto j = json::parse(line);
    SelectionResult r;
    r.image_id = j.at("image_id").get<std::string>();
    r.class_label = j.at("class").get<int>();
    r.method = solve_method_from_string(j.at("method").get<std::string>());
    r.bitstring = bitstring_from_string(j.at("bitstring").get<std::string>());
    r.selected_fm_indices = j.at("selected_fm_indices").get<std::vector<int>>();
    r.energy = j.at("energy").get<double>();
    r.n_shots = j.at("n_shots").get<std::int64_t>();
    for (const auto& [key, count] : j.at("histogram").items()) {
      r.histogram[bitstring_from_string(key)] = count.get<std::int64_t>();
    }
    if (j.contains("fidelity")) r.fidelity = j["fidelity"].get<double>();
    if (j.contains("degeneracy")) r.degeneracy = j["degeneracy"].get<std::uint64_t>();
    if (j.contains("note")) r.note = j["note"].get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed selection record: ") + e.what());
  }
}

void write_selection_file(std::span<const SelectionResult> results, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : results) out << to_json_line(r) << '\n';
}

std::vector<SelectionResult> read_selection_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<SelectionResult> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(selection_from_json_line(line));
  }
  return out;
}

}  // namespace qfs
