#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ir_agent/error.hpp"

namespace ir_agent::smiles {

enum class BondOrder : std::uint8_t { kSingle = 1, kDouble = 2, kTriple = 3, kAromatic = 4 };

struct Atom {
  std::string element;  // "C", "Cl", "Se"; capitalized even when aromatic
  int charge = 0;
  /// Total hydrogens: parsed from brackets, or derived from the default
  /// valence for organic-subset atoms.
  int hydrogens = 0;
  bool aromatic = false;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Bond {
  std::size_t a = 0;
  std::size_t b = 0;
  BondOrder order = BondOrder::kSingle;

  friend bool operator==(const Bond&, const Bond&) = default;
};

/// Constitutional molecular graph with explicit hydrogen counts.
class MoleculeGraph {
 public:
  MoleculeGraph() = default;
  /// Validates endpoints, duplicate bonds, element symbols and aromatic flags.
  MoleculeGraph(std::vector<Atom> atoms, std::vector<Bond> bonds);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::span<const Bond> bonds() const noexcept { return bonds_; }
  std::size_t atom_count() const noexcept { return atoms_.size(); }

  /// (neighbor, order) pairs of atom i.
  const std::vector<std::pair<std::size_t, BondOrder>>& neighbors(std::size_t i) const {
    return adjacency_[i];
  }

  /// Relabel atoms: atom i of the result is atom `order[i]` of this graph.
  MoleculeGraph permuted(std::span<const std::size_t> order) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<std::pair<std::size_t, BondOrder>>> adjacency_;
};

/// SMILES grammar error at a byte offset of the input.
class SmilesError : public Error {
 public:
  SmilesError(const std::string& message, std::size_t offset)
      : Error(ErrorCategory::kParse, message + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

struct ParseDiagnostics {
  bool stereo_discarded = false;
  bool isotope_ignored = false;
  std::vector<std::string> warnings;
};

bool is_element(std::string_view symbol);

/// Organic subset, bracket atoms (isotope and atom class ignored), bonds
/// - = # : / \, branches, ring closures (digits and %nn) and '.' components.
/// Stereo marks are dropped with a warning.
MoleculeGraph parse(std::string_view smiles, ParseDiagnostics* diagnostics = nullptr);

/// Hydrogens an organic-subset atom carries given its bonds in `graph`.
int implicit_hydrogens(const MoleculeGraph& graph, std::size_t atom);

struct CanonicalForm {
  std::string text;

  friend bool operator==(const CanonicalForm&, const CanonicalForm&) = default;
};

/// Serialize with a fixed atom ranking (rank[i] is the position of atom i).
/// Deterministic DFS from the lowest ranked atom of each component.
std::string write_smiles(const MoleculeGraph& graph, std::span<const std::size_t> rank);

/// Permutation-invariant serialization: invariant refinement to a stable
/// partition, then individualization of tied atoms keeping the smallest string.
CanonicalForm canonicalize(const MoleculeGraph& graph);

/// Same graph with aromatic flags cleared and every bond reduced to single.
/// Hydrogen counts are kept, so Kekule and aromatic spellings of one ring
/// collapse to the same key.
MoleculeGraph aromatic_normalized(const MoleculeGraph& graph);

struct Comparison {
  bool equivalent = false;
  /// Equal after aromatic_normalized; always true when `equivalent` is.
  bool aromatic_normalized_equivalent = false;
  bool parse_failure = false;
  bool stereo_discarded = false;
};

Comparison compare(std::string_view a, std::string_view b);
/// Never throws; unparseable input is simply not equivalent to anything.
bool equivalent(std::string_view a, std::string_view b);

/// Canonical text or nullopt when `smiles` does not parse.
std::optional<std::string> try_canonical(std::string_view smiles);

// Chemical facts used for prompt augmentation.

/// Distinct elements, carbon first then alphabetical ("C, Br, F").
std::vector<std::string> element_types(const MoleculeGraph& graph);
std::size_t count_element(const MoleculeGraph& graph, std::string_view element);
/// Ring systems plus linkers: terminal atoms are stripped until none remain.
/// Empty for acyclic molecules.
MoleculeGraph ring_scaffold(const MoleculeGraph& graph);

}  // namespace ir_agent::smiles
