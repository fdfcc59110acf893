#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace sepeff {

/// Mediator layout. The first `ell` mediators are structural zeros: they can
/// only equal 1 when the exposure is 1.
struct MediatorSchema {
  int k = 0;
  int ell = 0;
  std::vector<std::string> names;

  /// Throws ValidationError when ell > k, names.size() != k, or names repeat.
  void check() const;

  static MediatorSchema unnamed(int k, int ell);
};

/// One mother-child pair.
struct SubjectRecord {
  std::vector<double> c;  // baseline covariates
  int a = 0;              // exposure (surgery with anesthesia)
  std::vector<int> m;     // binary mediators, schema order
  double time = 0.0;      // follow-up time
  int event = 0;          // 1 = diagnosis observed
};

/// Immutable subject-level data set. Construction checks shapes only; the
/// substantive invariants are reported by validate_dataset.
class Dataset {
 public:
  Dataset(MediatorSchema schema, int p, std::vector<SubjectRecord> records);

  const MediatorSchema& schema() const noexcept { return schema_; }
  int p() const noexcept { return p_; }
  int k() const noexcept { return schema_.k; }
  int ell() const noexcept { return schema_.ell; }
  std::size_t size() const noexcept { return records_.size(); }
  const SubjectRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<SubjectRecord>& records() const noexcept { return records_; }

 private:
  MediatorSchema schema_;
  int p_;
  std::vector<SubjectRecord> records_;
};

struct ValidationFinding {
  std::string invariant;
  bool warning = false;  // warnings never make a report fail
  std::vector<std::size_t> rows;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;

  std::size_t failure_count() const;
  std::size_t warning_count() const;
  bool ok() const { return failure_count() == 0; }
  /// First failure rendered as one line, or "" when ok().
  std::string first_failure() const;
};

ValidationReport validate_dataset(const Dataset& d);

/// Contents of a schema file: `{"p":int,"k":int,"ell":int,"names":[...]}`.
struct SchemaFile {
  MediatorSchema mediators;
  int p = 0;
};

SchemaFile load_schema(const std::filesystem::path& path);
void write_schema(const std::filesystem::path& path, const SchemaFile& schema);

/// Reads `c_1,...,c_p,a,m_1,...,m_k,time,event`. Throws IoError when the file
/// cannot be read and ValidationError for header, parse or invariant failures.
Dataset load_dataset(const std::filesystem::path& path, const MediatorSchema& schema, int p);
/// Writes the same format with shortest round-trip decimal representations,
/// so load_dataset(write_dataset(d)) reproduces every value bit for bit.
void write_dataset(const std::filesystem::path& path, const Dataset& d);

std::string dataset_header(int p, int k);

}  // namespace sepeff
