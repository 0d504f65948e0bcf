#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ir_agent/spectrum.hpp"

namespace ir_agent {

/// Reference spectra with known structures. All entries share one grid, are in
/// absorbance mode, carry a SMILES string and have unique ids.
class SpectraDatabase {
 public:
  explicit SpectraDatabase(std::vector<Spectrum> entries);

  const WavenumberGrid& grid() const noexcept { return grid_; }
  std::span<const Spectrum> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  /// Precomputed Euclidean norm of entry i.
  double norm(std::size_t i) const noexcept { return norms_[i]; }
  std::optional<std::size_t> find(const std::string& id) const;

 private:
  std::vector<Spectrum> entries_;
  std::vector<double> norms_;
  WavenumberGrid grid_;
};

/// A database with at most one entry hidden. Does not own the database.
class DatabaseView {
 public:
  DatabaseView(const SpectraDatabase& db) : db_(&db) {}  // NOLINT(google-explicit-constructor)
  DatabaseView(const SpectraDatabase& db, std::optional<std::size_t> excluded)
      : db_(&db), excluded_(excluded) {}

  const SpectraDatabase& database() const noexcept { return *db_; }
  bool excludes(std::size_t i) const noexcept { return excluded_ && *excluded_ == i; }
  std::size_t size() const noexcept { return db_->size() - (excluded_ ? 1 : 0); }

 private:
  const SpectraDatabase* db_;
  std::optional<std::size_t> excluded_;
};

DatabaseView exclude_self(const SpectraDatabase& db, const std::string& query_id);

struct RetrievalHit {
  std::string smiles;
  double similarity = 0.0;
  std::string id;
  /// Query or entry had zero norm; similarity was defined as 0.
  bool degenerate = false;

  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct RetrieveOptions {
  std::size_t top_n = 10;
  /// Worker threads for the scan; results do not depend on it.
  std::size_t jobs = 1;
};

/// Exhaustive cosine-similarity scan, best first; equal similarities are
/// ordered by id ascending.
std::vector<RetrievalHit> retrieve(const DatabaseView& db, const Spectrum& query,
                                   const RetrieveOptions& options = {});

nlohmann::json hits_to_json(std::span<const RetrievalHit> hits);

}  // namespace ir_agent
