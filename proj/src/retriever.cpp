#include "ir_agent/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "ir_agent/error.hpp"

namespace ir_agent {

namespace {

double euclidean_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

WavenumberGrid first_grid(const std::vector<Spectrum>& entries) {
  if (entries.empty()) throw DomainError("spectra database is empty");
  return entries.front().grid();
}

}  // namespace

SpectraDatabase::SpectraDatabase(std::vector<Spectrum> entries)
    : entries_(std::move(entries)), grid_(first_grid(entries_)) {
  std::unordered_set<std::string> ids;
  norms_.reserve(entries_.size());
  for (const auto& entry : entries_) {
    if (!(entry.grid() == grid_)) {
      throw DomainError("database entry '" + entry.id() + "' is on grid " +
                        entry.grid().describe() + ", expected " + grid_.describe());
    }
    if (entry.mode() != IntensityMode::kAbsorbance) {
      throw DomainError("database entry '" + entry.id() + "' is not in absorbance mode");
    }
    if (!entry.smiles()) throw DomainError("database entry '" + entry.id() + "' has no SMILES");
    if (!ids.insert(entry.id()).second) {
      throw DomainError("duplicate database id '" + entry.id() + "'");
    }
    norms_.push_back(euclidean_norm(entry.values()));
  }
}

std::optional<std::size_t> SpectraDatabase::find(const std::string& id) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id() == id) return i;
  }
  return std::nullopt;
}

DatabaseView exclude_self(const SpectraDatabase& db, const std::string& query_id) {
  return DatabaseView(db, db.find(query_id));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("cosine similarity of vectors of different length");
  const double na = euclidean_norm(a);
  const double nb = euclidean_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

std::vector<RetrievalHit> retrieve(const DatabaseView& view, const Spectrum& query,
                                   const RetrieveOptions& options) {
  const auto& db = view.database();
  if (options.top_n < 1) throw DomainError("top-n must be >= 1");
  if (!(query.grid() == db.grid())) {
    throw DomainError("query grid " + query.grid().describe() + " does not match database grid " +
                      db.grid().describe());
  }
  if (query.mode() != IntensityMode::kAbsorbance) {
    throw DomainError("retrieval query must be an absorbance spectrum");
  }

  const auto q = query.values();
  const double query_norm = euclidean_norm(q);
  const std::size_t n = db.size();
  std::vector<double> scores(n, 0.0);
  std::vector<char> degenerate(n, 0);
  const auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double denom = query_norm * db.norm(i);
      if (denom == 0.0) {
        degenerate[i] = 1;
      } else {
        scores[i] = dot(q, db.entries()[i].values()) / denom;
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    score_range(0, n);
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (n + jobs - 1) / jobs;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      workers.emplace_back(score_range, begin, std::min(n, begin + chunk));
    }
  }

  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!view.excludes(i)) order.push_back(i);
  }
  const auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return db.entries()[a].id() < db.entries()[b].id();
  };
  const std::size_t keep = std::min(options.top_n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    better);

  std::vector<RetrievalHit> hits;
  hits.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    const auto& entry = db.entries()[order[r]];
    hits.push_back({*entry.smiles(), scores[order[r]], entry.id(), degenerate[order[r]] != 0});
  }
  return hits;
}

nlohmann::json hits_to_json(std::span<const RetrievalHit> hits) {
  auto out = nlohmann::json::array();
  for (const auto& hit : hits) {
    nlohmann::json item = {{"id", hit.id}, {"smiles", hit.smiles}, {"similarity", hit.similarity}};
    if (hit.degenerate) item["degenerate"] = true;
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace ir_agent
