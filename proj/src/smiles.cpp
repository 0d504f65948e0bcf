#include "ir_agent/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_set>

namespace ir_agent::smiles {

namespace {

constexpr std::array<std::string_view, 118> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",
    "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh",
    "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re",
    "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db",
    "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

bool can_be_aromatic(std::string_view element) {
  return element == "B" || element == "C" || element == "N" || element == "O" ||
         element == "P" || element == "S" || element == "Se" || element == "As" ||
         element == "Te";
}

bool in_organic_subset(std::string_view element) {
  return element == "B" || element == "C" || element == "N" || element == "O" ||
         element == "P" || element == "S" || element == "F" || element == "Cl" ||
         element == "Br" || element == "I";
}

bool aromatic_organic(std::string_view element) {
  return element == "B" || element == "C" || element == "N" || element == "O" ||
         element == "P" || element == "S";
}

std::span<const int> default_valences(std::string_view element) {
  static constexpr int kB[] = {3};
  static constexpr int kC[] = {4};
  static constexpr int kN[] = {3};
  static constexpr int kO[] = {2};
  static constexpr int kP[] = {3, 5};
  static constexpr int kS[] = {2, 4, 6};
  static constexpr int kHalogen[] = {1};
  if (element == "B") return kB;
  if (element == "C") return kC;
  if (element == "N") return kN;
  if (element == "O") return kO;
  if (element == "P") return kP;
  if (element == "S") return kS;
  if (element == "F" || element == "Cl" || element == "Br" || element == "I") return kHalogen;
  return {};
}

int bond_valence(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle:
    case BondOrder::kAromatic: return 1;
    case BondOrder::kDouble: return 2;
    case BondOrder::kTriple: return 3;
  }
  return 1;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string capitalize(std::string_view s) {
  std::string out = lowercase(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

}  // namespace

bool is_element(std::string_view symbol) {
  return std::find(kElements.begin(), kElements.end(), symbol) != kElements.end();
}

MoleculeGraph::MoleculeGraph(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)), adjacency_(atoms_.size()) {
  for (const auto& atom : atoms_) {
    if (!is_element(atom.element)) throw DomainError("unknown element '" + atom.element + "'");
    if (atom.aromatic && !can_be_aromatic(atom.element)) {
      throw DomainError("element '" + atom.element + "' cannot be aromatic");
    }
    if (atom.hydrogens < 0) throw DomainError("negative hydrogen count");
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& bond : bonds_) {
    if (bond.a >= atoms_.size() || bond.b >= atoms_.size()) {
      throw DomainError("bond endpoint out of range");
    }
    if (bond.a == bond.b) throw DomainError("bond from an atom to itself");
    if (!seen.insert(std::minmax(bond.a, bond.b)).second) {
      throw DomainError("duplicate bond " + std::to_string(bond.a) + "-" + std::to_string(bond.b));
    }
    adjacency_[bond.a].emplace_back(bond.b, bond.order);
    adjacency_[bond.b].emplace_back(bond.a, bond.order);
  }
}

MoleculeGraph MoleculeGraph::permuted(std::span<const std::size_t> order) const {
  if (order.size() != atoms_.size()) throw DomainError("permutation size mismatch");
  std::vector<std::size_t> position(atoms_.size());
  std::vector<Atom> atoms;
  atoms.reserve(atoms_.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    position[order[i]] = i;
    atoms.push_back(atoms_[order[i]]);
  }
  std::vector<Bond> bonds;
  bonds.reserve(bonds_.size());
  for (const auto& bond : bonds_) bonds.push_back({position[bond.a], position[bond.b], bond.order});
  return MoleculeGraph(std::move(atoms), std::move(bonds));
}

int implicit_hydrogens(const MoleculeGraph& graph, std::size_t atom) {
  const auto& a = graph.atoms()[atom];
  const auto valences = default_valences(a.element);
  if (valences.empty()) return 0;
  int used = 0;
  for (const auto& [neighbor, order] : graph.neighbors(atom)) used += bond_valence(order);
  if (a.aromatic) {
    // an aromatic atom spends one valence on the pi system when its default
    // valence allows it (c, n, b, p); otherwise it donates a lone pair (o, s)
    if (used + 1 <= valences.front()) return valences.front() - used - 1;
    return std::max(0, valences.front() - used);
  }
  for (const int v : valences) {
    if (v >= used) return v - used;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct PendingBond {
  char symbol = 0;
  std::size_t offset = 0;
};

struct RingOpening {
  std::size_t atom;
  PendingBond bond;
  std::size_t offset;
};

class Parser {
 public:
  Parser(std::string_view text, ParseDiagnostics& diagnostics)
      : text_(text), diagnostics_(diagnostics) {}

  MoleculeGraph run() {
    if (text_.empty()) throw SmilesError("empty SMILES", 0);
    std::optional<std::size_t> previous;
    std::optional<PendingBond> pending;
    struct BranchFrame {
      std::size_t atom;
      std::size_t offset;
      bool has_content;
    };
    std::vector<BranchFrame> branches;

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      const std::size_t offset = pos_;
      if (c == '[' || std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t atom = c == '[' ? bracket_atom() : organic_atom();
        if (previous) {
          add_bond(*previous, atom, pending, offset);
        } else if (pending) {
          throw SmilesError("bond without a preceding atom", pending->offset);
        }
        if (!branches.empty()) branches.back().has_content = true;
        previous = atom;
        pending.reset();
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
        if (pending) throw SmilesError("two consecutive bond symbols", offset);
        if (!previous) throw SmilesError("bond without a preceding atom", offset);
        if (c == '/' || c == '\\') note_stereo();
        pending = PendingBond{c, offset};
        ++pos_;
      } else if (c == '(') {
        if (!previous) throw SmilesError("branch without a preceding atom", offset);
        if (pending) throw SmilesError("bond symbol before '('", pending->offset);
        branches.push_back({*previous, offset, false});
        ++pos_;
      } else if (c == ')') {
        if (branches.empty()) throw SmilesError("unbalanced ')'", offset);
        if (pending) throw SmilesError("dangling bond", pending->offset);
        if (!branches.back().has_content) throw SmilesError("empty branch", offset);
        previous = branches.back().atom;
        branches.pop_back();
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        if (!previous) throw SmilesError("ring closure without a preceding atom", offset);
        const int number = ring_number();
        ring_bond(*previous, number, pending, offset);
        pending.reset();
      } else if (c == '.') {
        if (pending) throw SmilesError("dangling bond", pending->offset);
        previous.reset();
        ++pos_;
      } else {
        throw SmilesError(std::string("unexpected character '") + c + "'", offset);
      }
    }
    if (pending) throw SmilesError("dangling bond", pending->offset);
    if (!branches.empty()) throw SmilesError("unclosed branch", branches.back().offset);
    if (!open_rings_.empty()) {
      std::size_t first = text_.size();
      for (const auto& [number, opening] : open_rings_) first = std::min(first, opening.offset);
      throw SmilesError("unmatched ring closure", first);
    }

    MoleculeGraph graph(atoms_, bonds_);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!bracketed_[i]) atoms_[i].hydrogens = implicit_hydrogens(graph, i);
    }
    return MoleculeGraph(std::move(atoms_), std::move(bonds_));
  }

 private:
  void note_stereo() {
    if (!diagnostics_.stereo_discarded) {
      diagnostics_.warnings.emplace_back("stereochemistry discarded");
    }
    diagnostics_.stereo_discarded = true;
  }

  std::size_t push_atom(Atom atom, bool bracketed) {
    atoms_.push_back(std::move(atom));
    bracketed_.push_back(bracketed);
    return atoms_.size() - 1;
  }

  std::size_t organic_atom() {
    const std::size_t offset = pos_;
    const char c = text_[pos_];
    const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
    Atom atom;
    if (c == 'C' && next == 'l') {
      atom.element = "Cl";
      pos_ += 2;
    } else if (c == 'B' && next == 'r') {
      atom.element = "Br";
      pos_ += 2;
    } else if (std::string_view("BCNOPSFI").find(c) != std::string_view::npos) {
      atom.element = std::string(1, c);
      ++pos_;
    } else if (std::string_view("bcnops").find(c) != std::string_view::npos) {
      atom.element = std::string(1, static_cast<char>(std::toupper(c)));
      atom.aromatic = true;
      ++pos_;
    } else {
      throw SmilesError(std::string("unknown organic-subset atom '") + c + "'", offset);
    }
    return push_atom(std::move(atom), false);
  }

  std::size_t bracket_atom() {
    const std::size_t open = pos_;
    ++pos_;  // '['
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (!diagnostics_.isotope_ignored) diagnostics_.warnings.emplace_back("isotope ignored");
      diagnostics_.isotope_ignored = true;
    }
    Atom atom;
    const std::size_t symbol_offset = pos_;
    if (pos_ >= text_.size()) throw SmilesError("unterminated bracket atom", open);
    const auto rest = text_.substr(pos_);
    if (std::islower(static_cast<unsigned char>(rest[0]))) {
      if (rest.size() >= 2 && (rest.substr(0, 2) == "se" || rest.substr(0, 2) == "as" ||
                               rest.substr(0, 2) == "te")) {
        atom.element = capitalize(rest.substr(0, 2));
        pos_ += 2;
      } else if (std::string_view("bcnops").find(rest[0]) != std::string_view::npos) {
        atom.element = capitalize(rest.substr(0, 1));
        ++pos_;
      } else {
        throw SmilesError("unknown aromatic element", symbol_offset);
      }
      atom.aromatic = true;
    } else if (std::isupper(static_cast<unsigned char>(rest[0]))) {
      if (rest.size() >= 2 && std::islower(static_cast<unsigned char>(rest[1])) &&
          is_element(rest.substr(0, 2))) {
        atom.element = std::string(rest.substr(0, 2));
        pos_ += 2;
      } else if (is_element(rest.substr(0, 1))) {
        atom.element = std::string(rest.substr(0, 1));
        ++pos_;
      } else {
        throw SmilesError("unknown element", symbol_offset);
      }
    } else {
      throw SmilesError("expected element symbol", symbol_offset);
    }

    if (pos_ < text_.size() && text_[pos_] == '@') {
      note_stereo();
      ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '@') {
        ++pos_;
      } else if (pos_ + 1 < text_.size() && std::isupper(static_cast<unsigned char>(text_[pos_])) &&
                 std::isupper(static_cast<unsigned char>(text_[pos_ + 1]))) {
        const auto cls = text_.substr(pos_, 2);
        if (cls == "TH" || cls == "AL" || cls == "SP" || cls == "TB" || cls == "OH") {
          pos_ += 2;
          while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
      }
    }
    if (pos_ < text_.size() && text_[pos_] == 'H') {
      ++pos_;
      atom.hydrogens = 1;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        atom.hydrogens = read_int();
      }
    }
    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      const char sign_char = text_[pos_];
      const int sign = sign_char == '+' ? 1 : -1;
      ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        atom.charge = sign * read_int();
      } else {
        int magnitude = 1;
        while (pos_ < text_.size() && text_[pos_] == sign_char) {
          ++magnitude;
          ++pos_;
        }
        atom.charge = sign * magnitude;
      }
    }
    if (pos_ < text_.size() && text_[pos_] == ':') {
      ++pos_;
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        throw SmilesError("atom class needs digits", pos_);
      }
      read_int();
    }
    if (pos_ >= text_.size() || text_[pos_] != ']') {
      throw SmilesError("unterminated bracket atom", open);
    }
    ++pos_;
    return push_atom(std::move(atom), true);
  }

  int read_int() {
    int value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      if (value > 1000) throw SmilesError("number too large", pos_);
      ++pos_;
    }
    return value;
  }

  int ring_number() {
    if (text_[pos_] == '%') {
      const std::size_t offset = pos_;
      if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
        throw SmilesError("'%' must be followed by two digits", offset);
      }
      const int number = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
      return number;
    }
    return text_[pos_++] - '0';
  }

  BondOrder order_for(const std::optional<PendingBond>& bond, std::size_t a, std::size_t b) const {
    if (!bond) {
      return atoms_[a].aromatic && atoms_[b].aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
    }
    switch (bond->symbol) {
      case '=': return BondOrder::kDouble;
      case '#': return BondOrder::kTriple;
      case ':': return BondOrder::kAromatic;
      default: return BondOrder::kSingle;
    }
  }

  void add_bond(std::size_t a, std::size_t b, const std::optional<PendingBond>& bond,
                std::size_t offset) {
    const auto key = std::minmax(a, b);
    if (a == b) throw SmilesError("ring bond from an atom to itself", offset);
    if (!bond_keys_.insert(key).second) throw SmilesError("duplicate bond", offset);
    bonds_.push_back({a, b, order_for(bond, a, b)});
  }

  void ring_bond(std::size_t atom, int number, const std::optional<PendingBond>& bond,
                 std::size_t offset) {
    const auto it = open_rings_.find(number);
    if (it == open_rings_.end()) {
      open_rings_[number] = RingOpening{atom, bond.value_or(PendingBond{}), offset};
      return;
    }
    const RingOpening opening = it->second;
    open_rings_.erase(it);
    const auto normalize = [](char symbol) {
      return symbol == '/' || symbol == '\\' ? '-' : symbol;
    };
    const char first = normalize(opening.bond.symbol);
    const char second = bond ? normalize(bond->symbol) : '\0';
    if (first != 0 && second != 0 && first != second) {
      throw SmilesError("conflicting bond orders on ring closure " + std::to_string(number),
                        offset);
    }
    std::optional<PendingBond> chosen;
    if (first != 0) chosen = opening.bond;
    if (second != 0) chosen = bond;
    add_bond(opening.atom, atom, chosen, offset);
  }

  std::string_view text_;
  ParseDiagnostics& diagnostics_;
  std::size_t pos_ = 0;
  std::vector<Atom> atoms_;
  std::vector<bool> bracketed_;
  std::vector<Bond> bonds_;
  std::set<std::pair<std::size_t, std::size_t>> bond_keys_;
  std::map<int, RingOpening> open_rings_;
};

}  // namespace

MoleculeGraph parse(std::string_view smiles, ParseDiagnostics* diagnostics) {
  ParseDiagnostics local;
  Parser parser(smiles, diagnostics != nullptr ? *diagnostics : local);
  try {
    return parser.run();
  } catch (const DomainError& e) {
    throw SmilesError(e.what(), 0);
  }
}

// ---------------------------------------------------------------------------
// Writer

namespace {

std::string atom_text(const MoleculeGraph& graph, std::size_t i) {
  const auto& atom = graph.atoms()[i];
  const bool organic = atom.aromatic ? aromatic_organic(atom.element)
                                     : in_organic_subset(atom.element);
  if (organic && atom.charge == 0 && atom.hydrogens == implicit_hydrogens(graph, i)) {
    return atom.aromatic ? lowercase(atom.element) : atom.element;
  }
  std::string out = "[";
  out += atom.aromatic ? lowercase(atom.element) : atom.element;
  if (atom.hydrogens > 0) {
    out += 'H';
    if (atom.hydrogens > 1) out += std::to_string(atom.hydrogens);
  }
  if (atom.charge != 0) {
    out += atom.charge > 0 ? '+' : '-';
    const int magnitude = std::abs(atom.charge);
    if (magnitude > 1) out += std::to_string(magnitude);
  }
  out += ']';
  return out;
}

std::string bond_text(const MoleculeGraph& graph, std::size_t a, std::size_t b, BondOrder order) {
  const bool both_aromatic = graph.atoms()[a].aromatic && graph.atoms()[b].aromatic;
  switch (order) {
    case BondOrder::kSingle: return both_aromatic ? "-" : "";
    case BondOrder::kAromatic: return both_aromatic ? "" : ":";
    case BondOrder::kDouble: return "=";
    case BondOrder::kTriple: return "#";
  }
  return "";
}

std::string ring_label(int number) {
  return number < 10 ? std::to_string(number) : "%" + std::to_string(number);
}

class Writer {
 public:
  Writer(const MoleculeGraph& graph, std::span<const std::size_t> rank)
      : graph_(graph), rank_(rank), n_(graph.atom_count()) {
    sorted_neighbors_.resize(n_);
    for (std::size_t v = 0; v < n_; ++v) {
      auto& list = sorted_neighbors_[v];
      list = graph_.neighbors(v);
      std::sort(list.begin(), list.end(),
                [&](const auto& x, const auto& y) { return rank_[x.first] < rank_[y.first]; });
    }
  }

  std::string run() {
    std::vector<std::size_t> by_rank(n_);
    std::iota(by_rank.begin(), by_rank.end(), std::size_t{0});
    std::sort(by_rank.begin(), by_rank.end(),
              [&](std::size_t a, std::size_t b) { return rank_[a] < rank_[b]; });

    visited_.assign(n_, false);
    parent_.assign(n_, npos);
    children_.assign(n_, {});
    ring_partners_.assign(n_, {});
    for (const std::size_t start : by_rank) {
      if (visited_[start]) continue;
      roots_.push_back(start);
      build_tree(start);
    }

    std::string out;
    for (std::size_t c = 0; c < roots_.size(); ++c) {
      if (c > 0) out += '.';
      emit(roots_[c], out);
    }
    return out;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  void build_tree(std::size_t root) {
    // iterative DFS; ring bonds are the non-tree edges to already visited atoms
    struct Frame {
      std::size_t atom;
      std::size_t next = 0;
    };
    std::vector<Frame> stack{{root}};
    visited_[root] = true;
    while (!stack.empty()) {
      auto& frame = stack.back();
      const auto& list = sorted_neighbors_[frame.atom];
      if (frame.next == list.size()) {
        stack.pop_back();
        continue;
      }
      const auto [w, order] = list[frame.next++];
      const std::size_t v = frame.atom;
      if (w == parent_[v]) continue;
      if (visited_[w]) {
        // record each ring bond once, from the atom visited later
        if (!is_ring_partner(w, v)) {
          ring_partners_[w].push_back({v, order});
          ring_partners_[v].push_back({w, order});
        }
        continue;
      }
      visited_[w] = true;
      parent_[w] = v;
      children_[v].push_back({w, order});
      stack.push_back({w});
    }
  }

  bool is_ring_partner(std::size_t a, std::size_t b) const {
    for (const auto& [p, order] : ring_partners_[a]) {
      if (p == b) return true;
    }
    return false;
  }

  void emit(std::size_t root, std::string& out) {
    struct Frame {
      std::size_t atom;
      std::size_t next_child = 0;
    };
    std::vector<Frame> stack;
    const auto open_atom = [&](std::size_t v) {
      out += atom_text(graph_, v);
      auto partners = ring_partners_[v];
      std::sort(partners.begin(), partners.end(),
                [&](const auto& x, const auto& y) { return rank_[x.first] < rank_[y.first]; });
      // closures of rings opened earlier, then new openings
      for (const auto& [p, order] : partners) {
        const auto key = std::minmax(v, p);
        const auto it = open_labels_.find(key);
        if (it != open_labels_.end()) {
          out += ring_label(it->second);
          free_labels_.insert(it->second);
          open_labels_.erase(it);
        }
      }
      for (const auto& [p, order] : partners) {
        const auto key = std::minmax(v, p);
        if (closed_.contains(key)) continue;
        if (open_labels_.contains(key)) continue;
        int label = next_label_;
        if (!free_labels_.empty()) {
          label = *free_labels_.begin();
          free_labels_.erase(free_labels_.begin());
        } else {
          ++next_label_;
        }
        out += bond_text(graph_, v, p, order);
        out += ring_label(label);
        open_labels_[key] = label;
        closed_.insert(key);
      }
    };

    open_atom(root);
    stack.push_back({root});
    while (!stack.empty()) {
      auto& frame = stack.back();
      const auto& kids = children_[frame.atom];
      if (frame.next_child == kids.size()) {
        stack.pop_back();
        if (!stack.empty()) {
          auto& parent = stack.back();
          if (parent.next_child < children_[parent.atom].size()) out += ')';
        }
        continue;
      }
      const std::size_t index = frame.next_child++;
      const auto [child, order] = kids[index];
      const bool is_branch = index + 1 < kids.size();
      if (is_branch) out += '(';
      out += bond_text(graph_, frame.atom, child, order);
      open_atom(child);
      stack.push_back({child});
    }
  }

  const MoleculeGraph& graph_;
  std::span<const std::size_t> rank_;
  std::size_t n_;
  std::vector<std::vector<std::pair<std::size_t, BondOrder>>> sorted_neighbors_;
  std::vector<bool> visited_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<std::pair<std::size_t, BondOrder>>> children_;
  std::vector<std::vector<std::pair<std::size_t, BondOrder>>> ring_partners_;
  std::vector<std::size_t> roots_;
  std::map<std::pair<std::size_t, std::size_t>, int> open_labels_;
  std::set<std::pair<std::size_t, std::size_t>> closed_;
  std::set<int> free_labels_;
  int next_label_ = 1;
};

}  // namespace

std::string write_smiles(const MoleculeGraph& graph, std::span<const std::size_t> rank) {
  if (rank.size() != graph.atom_count()) throw DomainError("rank size mismatch");
  return Writer(graph, rank).run();
}

// ---------------------------------------------------------------------------
// Canonicalization

namespace {

using Classes = std::vector<std::size_t>;

/// Replace arbitrary sortable keys by dense ranks 0..k-1 in key order.
template <typename Key>
Classes dense_ranks(const std::vector<Key>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  Classes classes(keys.size());
  std::size_t rank = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && keys[order[i - 1]] < keys[order[i]]) ++rank;
    classes[order[i]] = rank;
  }
  return classes;
}

std::size_t distinct(const Classes& classes) {
  return std::set<std::size_t>(classes.begin(), classes.end()).size();
}

class Canonicalizer {
 public:
  explicit Canonicalizer(const MoleculeGraph& graph) : graph_(graph), n_(graph.atom_count()) {}

  std::string run() {
    if (n_ == 0) return "";
    using Initial = std::tuple<std::string, int, std::size_t, int, bool>;
    std::vector<Initial> keys;
    keys.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto& a = graph_.atoms()[i];
      keys.emplace_back(a.element, a.charge, graph_.neighbors(i).size(), a.hydrogens, a.aromatic);
    }
    explore(dense_ranks(keys));
    return best_;
  }

 private:
  Classes refine(Classes classes) const {
    std::size_t count = distinct(classes);
    while (true) {
      using Signature = std::pair<std::size_t, std::vector<std::pair<int, std::size_t>>>;
      std::vector<Signature> sigs(n_);
      for (std::size_t v = 0; v < n_; ++v) {
        sigs[v].first = classes[v];
        for (const auto& [w, order] : graph_.neighbors(v)) {
          sigs[v].second.emplace_back(static_cast<int>(order), classes[w]);
        }
        std::sort(sigs[v].second.begin(), sigs[v].second.end());
      }
      Classes next = dense_ranks(sigs);
      const std::size_t next_count = distinct(next);
      classes = std::move(next);
      if (next_count == count) return classes;
      count = next_count;
    }
  }

  // Returns false when the first leaf under this node repeats a string seen
  // in an earlier subtree: an automorphism then maps that subtree onto this one.
  bool explore(Classes classes) {
    classes = refine(std::move(classes));
    if (distinct(classes) == n_) {
      std::string text = write_smiles(graph_, classes);
      const bool fresh = seen_.insert(text).second;
      if (best_.empty() || text < best_) best_ = std::move(text);
      return fresh;
    }
    // target cell: smallest class value among non-singleton classes
    std::vector<std::size_t> sizes(n_, 0);
    for (const auto c : classes) ++sizes[c];
    std::size_t target = n_;
    for (std::size_t c = 0; c < n_; ++c) {
      if (sizes[c] > 1) {
        target = c;
        break;
      }
    }
    bool first = true;
    for (std::size_t v = 0; v < n_; ++v) {
      if (classes[v] != target) continue;
      Classes split(n_);
      for (std::size_t u = 0; u < n_; ++u) {
        split[u] = 2 * classes[u] + ((classes[u] == target && u != v) ? 1 : 0);
      }
      const bool fresh = explore(dense_ranks(split));
      if (first && !fresh) return false;
      first = false;
    }
    return true;
  }

  const MoleculeGraph& graph_;
  std::size_t n_;
  std::string best_;
  std::unordered_set<std::string> seen_;
};

}  // namespace

CanonicalForm canonicalize(const MoleculeGraph& graph) {
  return CanonicalForm{Canonicalizer(graph).run()};
}

MoleculeGraph aromatic_normalized(const MoleculeGraph& graph) {
  std::vector<Atom> atoms(graph.atoms().begin(), graph.atoms().end());
  for (auto& atom : atoms) atom.aromatic = false;
  std::vector<Bond> bonds(graph.bonds().begin(), graph.bonds().end());
  for (auto& bond : bonds) bond.order = BondOrder::kSingle;
  return MoleculeGraph(std::move(atoms), std::move(bonds));
}

Comparison compare(std::string_view a, std::string_view b) {
  Comparison result;
  try {
    ParseDiagnostics da;
    ParseDiagnostics db;
    const auto ga = parse(a, &da);
    const auto gb = parse(b, &db);
    result.stereo_discarded = da.stereo_discarded || db.stereo_discarded;
    result.equivalent = canonicalize(ga) == canonicalize(gb);
    result.aromatic_normalized_equivalent =
        result.equivalent ||
        canonicalize(aromatic_normalized(ga)) == canonicalize(aromatic_normalized(gb));
  } catch (const Error&) {
    result = Comparison{};
    result.parse_failure = true;
  }
  return result;
}

bool equivalent(std::string_view a, std::string_view b) { return compare(a, b).equivalent; }

std::optional<std::string> try_canonical(std::string_view smiles) {
  try {
    return canonicalize(parse(smiles)).text;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<std::string> element_types(const MoleculeGraph& graph) {
  std::set<std::string> elements;
  for (const auto& atom : graph.atoms()) elements.insert(atom.element);
  std::vector<std::string> out;
  if (elements.erase("C") > 0) out.emplace_back("C");
  out.insert(out.end(), elements.begin(), elements.end());
  return out;
}

std::size_t count_element(const MoleculeGraph& graph, std::string_view element) {
  return static_cast<std::size_t>(std::count_if(
      graph.atoms().begin(), graph.atoms().end(),
      [&](const Atom& atom) { return atom.element == element; }));
}

MoleculeGraph ring_scaffold(const MoleculeGraph& graph) {
  const std::size_t n = graph.atom_count();
  std::vector<bool> removed(n, false);
  std::vector<int> gained(n, 0);
  std::vector<std::size_t> degree(n);
  for (std::size_t i = 0; i < n; ++i) degree[i] = graph.neighbors(i).size();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (removed[i] || degree[i] > 1) continue;
      removed[i] = true;
      changed = true;
      for (const auto& [w, order] : graph.neighbors(i)) {
        if (removed[w]) continue;
        --degree[w];
        gained[w] += bond_valence(order);
      }
    }
  }
  std::vector<std::size_t> index(n, 0);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < n; ++i) {
    if (removed[i]) continue;
    index[i] = atoms.size();
    Atom atom = graph.atoms()[i];
    atom.hydrogens += gained[i];
    atoms.push_back(std::move(atom));
  }
  std::vector<Bond> bonds;
  for (const auto& bond : graph.bonds()) {
    if (!removed[bond.a] && !removed[bond.b]) bonds.push_back({index[bond.a], index[bond.b], bond.order});
  }
  return MoleculeGraph(std::move(atoms), std::move(bonds));
}

}  // namespace ir_agent::smiles
