#include "dualscale/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dualscale/error.hpp"

namespace dualscale {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::InvalidInput, msg); }

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("malformed ") + what + " JSON: " + e.what());
  }
}

template <typename T>
T field(const json& obj, const char* key, const char* ctx) {
  if (!obj.is_object() || !obj.contains(key)) bad(std::string(ctx) + ": missing key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string(ctx) + ": key '" + key + "' has the wrong type");
  }
}

int index_of(const std::map<int, int>& ids, int id, const char* what) {
  auto it = ids.find(id);
  if (it == ids.end()) bad(std::string("unknown ") + what + " id " + std::to_string(id));
  return it->second;
}

std::map<int, int> index_ids(const std::vector<int>& ids, const char* what) {
  std::map<int, int> out;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (!out.emplace(ids[i], static_cast<int>(i)).second) bad(std::string("duplicate ") + what + " id " + std::to_string(ids[i]));
  return out;
}

std::uint32_t parse_mask(const std::string& key, int n) {
  std::uint32_t v = 0;
  const auto* end = key.data() + key.size();
  auto [p, ec] = std::from_chars(key.data(), end, v);
  if (ec != std::errc() || p != end) bad("pattern key '" + key + "' is not a decimal bitmask");
  if (n < 32 && (v >> n) != 0) bad("pattern key '" + key + "' names an AP outside the scenario");
  return v;
}

std::vector<double> parse_distribution(const json& doc, const char* key, int n) {
  std::vector<double> out(pattern_count(n), 0.0);
  if (!doc.contains(key)) bad(std::string("allocation: missing key '") + key + "'");
  const json& m = doc.at(key);
  if (!m.is_object()) bad(std::string("allocation: '") + key + "' must be an object keyed by pattern masks");
  for (const auto& [k, v] : m.items()) {
    if (!v.is_number()) bad(std::string("allocation: '") + key + "' values must be numbers");
    out[parse_mask(k, n)] = v.get<double>();
  }
  return out;
}

json distribution_json(const std::vector<double>& v) {
  json out = json::object();
  for (std::size_t m = 0; m < v.size(); ++m)
    if (v[m] != 0.0) out[std::to_string(m)] = v[m];
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) bad("cannot write '" + path + "'");
  out << content;
  if (!out) bad("write to '" + path + "' failed");
}

Scenario parse_scenario(const std::string& text) {
  const json doc = parse_json(text, "scenario");
  if (!doc.is_object()) bad("scenario must be a JSON object");
  Scenario sc;
  const auto aps = field<json>(doc, "aps", "scenario");
  const auto ues = field<json>(doc, "ue_groups", "scenario");
  if (!aps.is_array() || !ues.is_array()) bad("scenario: 'aps' and 'ue_groups' must be lists");
  for (const auto& a : aps) {
    sc.ap_ids.push_back(field<int>(a, "id", "ap"));
    sc.ap_positions.push_back({field<double>(a, "x", "ap"), field<double>(a, "y", "ap")});
    sc.psd.push_back(field<double>(a, "psd_w_per_hz", "ap"));
  }
  for (const auto& u : ues) {
    sc.ue_ids.push_back(field<int>(u, "id", "ue_group"));
    sc.ue_positions.push_back({field<double>(u, "x", "ue_group"), field<double>(u, "y", "ue_group")});
    sc.lambda.push_back(field<double>(u, "lambda_pps", "ue_group"));
    sc.noise.push_back(field<double>(u, "noise_psd_w_per_hz", "ue_group"));
  }
  sc.bandwidth_hz = field<double>(doc, "bandwidth_hz", "scenario");
  sc.mean_packet_bits = field<double>(doc, "mean_packet_bits", "scenario");
  sc.pathloss_exponent = field<double>(doc, "pathloss_exponent", "scenario");
  if (sc.ap_ids.size() > 32) bad("too many APs");

  const auto ap_index = index_ids(sc.ap_ids, "AP");
  const auto ue_index = index_ids(sc.ue_ids, "UE group");

  sc.neighbors.assign(sc.ap_ids.size(), Pattern{});
  const auto nbrs = field<json>(doc, "neighbors", "scenario");
  if (!nbrs.is_array()) bad("scenario: 'neighbors' must be a list of AP-id pairs");
  for (const auto& pr : nbrs) {
    if (!pr.is_array() || pr.size() != 2 || !pr[0].is_number_integer() || !pr[1].is_number_integer())
      bad("scenario: each neighbor entry must be a pair of AP ids");
    const int a = index_of(ap_index, pr[0].get<int>(), "AP");
    const int b = index_of(ap_index, pr[1].get<int>(), "AP");
    if (a == b) bad("an AP cannot be its own neighbor");
    sc.neighbors[static_cast<std::size_t>(a)] = sc.neighbors[static_cast<std::size_t>(a)].with(b);
    sc.neighbors[static_cast<std::size_t>(b)] = sc.neighbors[static_cast<std::size_t>(b)].with(a);
  }

  if (!doc.contains("association")) bad("scenario: missing key 'association'");
  const json& assoc = doc.at("association");
  if (assoc.is_string() && assoc.get<std::string>() == "flexible") {
    sc.group_of_ap.reset();
  } else if (assoc.is_object() && assoc.value("type", "") == "fixed") {
    const auto map = field<json>(assoc, "map", "association");
    if (!map.is_array()) bad("association: 'map' must be a list");
    std::vector<int> g(sc.ap_ids.size(), -1);
    for (const auto& e : map) {
      const int ap = index_of(ap_index, field<int>(e, "ap", "association entry"), "AP");
      const int ue = index_of(ue_index, field<int>(e, "ue", "association entry"), "UE group");
      if (g[static_cast<std::size_t>(ap)] >= 0) bad("association: AP listed twice");
      g[static_cast<std::size_t>(ap)] = ue;
    }
    for (int v : g)
      if (v < 0) bad("association: every AP needs a UE group");
    sc.group_of_ap = std::move(g);
  } else {
    bad("association must be \"flexible\" or {\"type\": \"fixed\", \"map\": [...]}");
  }

  if (doc.contains("shadow")) {
    const json& sh = doc.at("shadow");
    if (!sh.is_array()) bad("scenario: 'shadow' must be a list");
    sc.shadow.assign(sc.ap_ids.size() * sc.ue_ids.size(), 1.0);
    for (const auto& e : sh) {
      const int ap = index_of(ap_index, field<int>(e, "ap", "shadow entry"), "AP");
      const int ue = index_of(ue_index, field<int>(e, "ue", "shadow entry"), "UE group");
      sc.shadow[static_cast<std::size_t>(ap) * sc.ue_ids.size() + static_cast<std::size_t>(ue)] =
          field<double>(e, "factor", "shadow entry");
    }
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string scenario_to_json(const Scenario& sc) {
  json doc;
  doc["aps"] = json::array();
  for (int i = 0; i < sc.n(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    doc["aps"].push_back({{"id", sc.ap_ids[ui]}, {"x", sc.ap_positions[ui].x}, {"y", sc.ap_positions[ui].y},
                          {"psd_w_per_hz", sc.psd[ui]}});
  }
  doc["ue_groups"] = json::array();
  for (int j = 0; j < sc.k(); ++j) {
    const auto uj = static_cast<std::size_t>(j);
    doc["ue_groups"].push_back({{"id", sc.ue_ids[uj]}, {"x", sc.ue_positions[uj].x}, {"y", sc.ue_positions[uj].y},
                                {"lambda_pps", sc.lambda[uj]}, {"noise_psd_w_per_hz", sc.noise[uj]}});
  }
  doc["bandwidth_hz"] = sc.bandwidth_hz;
  doc["mean_packet_bits"] = sc.mean_packet_bits;
  doc["pathloss_exponent"] = sc.pathloss_exponent;
  doc["neighbors"] = json::array();
  for (int i = 0; i < sc.n(); ++i)
    for (int l = i + 1; l < sc.n(); ++l)
      if (sc.neighbors[static_cast<std::size_t>(i)].contains(l))
        doc["neighbors"].push_back({sc.ap_ids[static_cast<std::size_t>(i)], sc.ap_ids[static_cast<std::size_t>(l)]});
  if (sc.fixed()) {
    json map = json::array();
    for (int i = 0; i < sc.n(); ++i)
      map.push_back({{"ue", sc.ue_ids[static_cast<std::size_t>(sc.group(i))]}, {"ap", sc.ap_ids[static_cast<std::size_t>(i)]}});
    doc["association"] = {{"type", "fixed"}, {"map", map}};
  } else {
    doc["association"] = "flexible";
  }
  if (!sc.shadow.empty()) {
    doc["shadow"] = json::array();
    for (int i = 0; i < sc.n(); ++i)
      for (int j = 0; j < sc.k(); ++j)
        doc["shadow"].push_back({{"ap", sc.ap_ids[static_cast<std::size_t>(i)]},
                                 {"ue", sc.ue_ids[static_cast<std::size_t>(j)]},
                                 {"factor", sc.shadow_factor(i, j)}});
  }
  return doc.dump(2) + "\n";
}

Allocation parse_allocation(const std::string& text, const Scenario& sc) {
  const json doc = parse_json(text, "allocation");
  if (!doc.is_object()) bad("allocation must be a JSON object");
  Allocation a;
  a.n = sc.n();
  a.k = sc.k();
  a.y = parse_distribution(doc, "y", a.n);
  a.z = parse_distribution(doc, "z", a.n);
  if (doc.contains("x") && !doc.at("x").empty()) {
    if (sc.fixed()) bad("allocation: 'x' given for a fixed-association scenario");
    const auto ap_index = index_ids(sc.ap_ids, "AP");
    const auto ue_index = index_ids(sc.ue_ids, "UE group");
    a.x.assign(static_cast<std::size_t>(a.n) * static_cast<std::size_t>(a.k) * a.patterns(), 0.0);
    const json& x = doc.at("x");
    if (!x.is_object()) bad("allocation: 'x' must be an object keyed by AP id");
    for (const auto& [ap_key, per_ue] : x.items()) {
      int ap_id = 0;
      try {
        ap_id = std::stoi(ap_key);
      } catch (const std::exception&) {
        bad("allocation: AP key '" + ap_key + "' is not an integer id");
      }
      const int i = index_of(ap_index, ap_id, "AP");
      if (!per_ue.is_object()) bad("allocation: x entries must be objects keyed by UE group id");
      for (const auto& [ue_key, dist] : per_ue.items()) {
        int ue_id = 0;
        try {
          ue_id = std::stoi(ue_key);
        } catch (const std::exception&) {
          bad("allocation: UE key '" + ue_key + "' is not an integer id");
        }
        const int j = index_of(ue_index, ue_id, "UE group");
        if (!dist.is_object()) bad("allocation: x leaf must be keyed by pattern masks");
        for (const auto& [mk, v] : dist.items()) {
          if (!v.is_number()) bad("allocation: x values must be numbers");
          a.xv(i, j, Pattern{parse_mask(mk, a.n)}) = v.get<double>();
        }
      }
    }
  } else if (!sc.fixed()) {
    bad("allocation: flexible scenario needs 'x'");
  }
  a.validate(1e-6);
  return a;
}

Allocation load_allocation(const std::string& path, const Scenario& sc) { return parse_allocation(read_file(path), sc); }

std::string allocation_to_json(const Allocation& alloc, const Scenario& sc) {
  json doc;
  doc["y"] = distribution_json(alloc.y);
  doc["z"] = distribution_json(alloc.z);
  json x = json::object();
  if (alloc.flexible()) {
    for (int i = 0; i < alloc.n; ++i) {
      json per_ue = json::object();
      for (int j = 0; j < alloc.k; ++j) {
        json d = json::object();
        for (std::size_t m = 0; m < alloc.patterns(); ++m) {
          const double v = alloc.xv(i, j, Pattern{static_cast<std::uint32_t>(m)});
          if (v != 0.0) d[std::to_string(m)] = v;
        }
        if (!d.empty()) per_ue[std::to_string(sc.ue_ids[static_cast<std::size_t>(j)])] = d;
      }
      if (!per_ue.empty()) x[std::to_string(sc.ap_ids[static_cast<std::size_t>(i)])] = per_ue;
    }
  }
  doc["x"] = x;
  return doc.dump(2) + "\n";
}

void save_allocation(const std::string& path, const Allocation& alloc, const Scenario& sc) {
  write_file(path, allocation_to_json(alloc, sc));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "";
  return std::string(buf, p);
}

}  // namespace dualscale
