#include "sepeff/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sepeff/error.hpp"
#include "sepeff/textio.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "data_model";

bool parse_indicator(std::string_view field, int& out) {
  double v = 0.0;
  if (!parse_double(field, v) || (v != 0.0 && v != 1.0)) return false;
  out = static_cast<int>(v);
  return true;
}

}  // namespace

void MediatorSchema::check() const {
  if (k < 0 || ell < 0 || ell > k) {
    throw ValidationError(kModule, "schema requires 0 <= ell <= k (k=" + std::to_string(k) +
                                       ", ell=" + std::to_string(ell) + ")");
  }
  if (static_cast<int>(names.size()) != k) {
    throw ValidationError(kModule, "schema lists " + std::to_string(names.size()) +
                                       " mediator names for k=" + std::to_string(k));
  }
  std::set<std::string> seen(names.begin(), names.end());
  if (seen.size() != names.size()) throw ValidationError(kModule, "mediator names must be unique");
}

MediatorSchema MediatorSchema::unnamed(int k, int ell) {
  MediatorSchema s{k, ell, {}};
  for (int j = 1; j <= k; ++j) s.names.push_back("m_" + std::to_string(j));
  return s;
}

Dataset::Dataset(MediatorSchema schema, int p, std::vector<SubjectRecord> records)
    : schema_(std::move(schema)), p_(p), records_(std::move(records)) {
  schema_.check();
  if (p_ < 0) throw ValidationError(kModule, "covariate dimension must be nonnegative");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (static_cast<int>(r.c.size()) != p_ || static_cast<int>(r.m.size()) != schema_.k) {
      throw ValidationError(kModule, "row " + std::to_string(i) + " has " +
                                         std::to_string(r.c.size()) + " covariates and " +
                                         std::to_string(r.m.size()) + " mediators; expected " +
                                         std::to_string(p_) + " and " + std::to_string(schema_.k));
    }
  }
}

std::size_t ValidationReport::failure_count() const {
  std::size_t n = 0;
  for (const auto& f : findings) n += f.warning ? 0 : 1;
  return n;
}

std::size_t ValidationReport::warning_count() const { return findings.size() - failure_count(); }

std::string ValidationReport::first_failure() const {
  for (const auto& f : findings) {
    if (f.warning) continue;
    std::string msg = f.invariant;
    if (!f.rows.empty()) msg += " (first offending row " + std::to_string(f.rows.front()) + ")";
    if (!f.detail.empty()) msg += ": " + f.detail;
    return msg;
  }
  return {};
}

ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport report;
  const int k = d.k();
  const int ell = d.ell();

  ValidationFinding time_bad{"time > 0", false, {}, {}};
  ValidationFinding indicator_bad{"indicators in {0,1}", false, {}, {}};
  ValidationFinding covariate_bad{"covariates finite", false, {}, {}};
  ValidationFinding structural_bad{"a=0 implies m_j=0 for j <= ell", false, {}, {}};

  std::size_t n_arm[2] = {0, 0};
  std::size_t events_arm[2] = {0, 0};
  std::vector<std::size_t> mediator_with_a0(k, 0), mediator_with_a1(k, 0);

  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& r = d[i];
    if (!(r.time > 0.0) || !std::isfinite(r.time)) time_bad.rows.push_back(i);
    bool indicators_ok = (r.a == 0 || r.a == 1) && (r.event == 0 || r.event == 1);
    for (int mj : r.m) indicators_ok = indicators_ok && (mj == 0 || mj == 1);
    if (!indicators_ok) {
      indicator_bad.rows.push_back(i);
      continue;
    }
    for (double c : r.c) {
      if (!std::isfinite(c)) {
        covariate_bad.rows.push_back(i);
        break;
      }
    }
    if (r.a == 0) {
      for (int j = 0; j < ell; ++j) {
        if (r.m[j] == 1) {
          structural_bad.rows.push_back(i);
          break;
        }
      }
    }
    ++n_arm[r.a];
    events_arm[r.a] += static_cast<std::size_t>(r.event);
    for (int j = 0; j < k; ++j) {
      if (r.m[j] == 1) ++(r.a == 1 ? mediator_with_a1 : mediator_with_a0)[j];
    }
  }

  for (auto* f : {&time_bad, &indicator_bad, &covariate_bad, &structural_bad}) {
    if (!f->rows.empty()) report.findings.push_back(std::move(*f));
  }
  if (n_arm[0] == 0 || n_arm[1] == 0) {
    report.findings.push_back({"both exposure levels present", false, {},
                               "n(a=0)=" + std::to_string(n_arm[0]) +
                                   ", n(a=1)=" + std::to_string(n_arm[1])});
  }
  for (int a = 0; a < 2; ++a) {
    if (n_arm[a] > 0 && events_arm[a] == 0) {
      report.findings.push_back(
          {"at least one event in each exposure arm", false, {}, "no events with a=" + std::to_string(a)});
    }
  }
  for (int j = ell; j < k; ++j) {
    if (mediator_with_a1[j] > 0 && mediator_with_a0[j] == 0) {
      report.findings.push_back(
          {"mediator " + d.schema().names[j] + " observed only with a=1", true, {},
           "declared non-structural (j > ell) but empirically a structural zero; "
           "its exposure terms are weakly identified"});
    }
  }
  return report;
}

SchemaFile load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(kModule, "cannot open schema file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    SchemaFile out;
    out.p = j.at("p").get<int>();
    out.mediators.k = j.at("k").get<int>();
    out.mediators.ell = j.at("ell").get<int>();
    out.mediators.names = j.at("names").get<std::vector<std::string>>();
    out.mediators.check();
    if (out.p < 0) throw ValidationError(kModule, "schema p must be nonnegative");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(kModule, "malformed schema file " + path.string() + ": " + e.what());
  }
}

void write_schema(const std::filesystem::path& path, const SchemaFile& schema) {
  nlohmann::json j;
  j["p"] = schema.p;
  j["k"] = schema.mediators.k;
  j["ell"] = schema.mediators.ell;
  j["names"] = schema.mediators.names;
  std::ofstream out(path);
  if (!out) throw IoError(kModule, "cannot write schema file " + path.string());
  out << j.dump(2) << '\n';
}

std::string dataset_header(int p, int k) {
  std::string h;
  for (int i = 1; i <= p; ++i) h += "c_" + std::to_string(i) + ",";
  h += "a,";
  for (int j = 1; j <= k; ++j) h += "m_" + std::to_string(j) + ",";
  h += "time,event";
  return h;
}

Dataset load_dataset(const std::filesystem::path& path, const MediatorSchema& schema, int p) {
  schema.check();
  std::ifstream in(path);
  if (!in) throw IoError(kModule, "cannot open data file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ValidationError(kModule, "empty data file " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::string expected = dataset_header(p, schema.k);
  if (line != expected) {
    const auto got = split_commas(line);
    const auto want = split_commas(expected);
    for (const auto& col : want) {
      if (std::find(got.begin(), got.end(), col) == got.end()) {
        throw ValidationError(kModule, "missing column '" + std::string(col) + "' in header");
      }
    }
    throw ValidationError(kModule, "header mismatch: expected '" + expected + "'");
  }

  const std::size_t width = static_cast<std::size_t>(p + schema.k + 3);
  std::vector<SubjectRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    const std::string where = "row " + std::to_string(row);
    if (fields.size() != width) {
      throw ValidationError(kModule, where + " has " + std::to_string(fields.size()) +
                                         " fields, expected " + std::to_string(width));
    }
    SubjectRecord r;
    r.c.resize(p);
    r.m.resize(schema.k);
    std::size_t f = 0;
    for (int i = 0; i < p; ++i, ++f) {
      if (!parse_double(fields[f], r.c[i])) {
        throw ValidationError(kModule, where + ": non-numeric covariate c_" + std::to_string(i + 1));
      }
    }
    if (!parse_indicator(fields[f++], r.a)) throw ValidationError(kModule, where + ": a must be 0 or 1");
    for (int j = 0; j < schema.k; ++j, ++f) {
      if (!parse_indicator(fields[f], r.m[j])) {
        throw ValidationError(kModule, where + ": m_" + std::to_string(j + 1) + " must be 0 or 1");
      }
    }
    if (!parse_double(fields[f++], r.time) || !(r.time > 0.0)) {
      throw ValidationError(kModule, where + ": time must be a positive number");
    }
    if (!parse_indicator(fields[f++], r.event)) {
      throw ValidationError(kModule, where + ": event must be 0 or 1");
    }
    if (r.a == 0) {
      for (int j = 0; j < schema.ell; ++j) {
        if (r.m[j] == 1) {
          throw ValidationError(kModule, where + ": structural-zero violation, a=0 with m_" +
                                             std::to_string(j + 1) + "=1");
        }
      }
    }
    records.push_back(std::move(r));
    ++row;
  }
  if (records.empty()) throw ValidationError(kModule, "data file has a header but no rows");

  Dataset d(schema, p, std::move(records));
  const auto report = validate_dataset(d);
  if (!report.ok()) throw ValidationError(kModule, report.first_failure());
  return d;
}

void write_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw IoError(kModule, "cannot write data file " + path.string());
  out << dataset_header(d.p(), d.k()) << '\n';
  std::string line;
  for (const auto& r : d.records()) {
    line.clear();
    for (double c : r.c) line += format_double(c) + ",";
    line += std::to_string(r.a) + ",";
    for (int mj : r.m) line += std::to_string(mj) + ",";
    line += format_double(r.time) + "," + std::to_string(r.event);
    out << line << '\n';
  }
  if (!out) throw IoError(kModule, "write failed for " + path.string());
}

}  // namespace sepeff
