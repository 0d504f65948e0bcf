#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "ir_agent/smiles.hpp"
#include "oracles.hpp"

using namespace ir_agent;
namespace sm = ir_agent::smiles;

namespace {

std::vector<std::string> corpus() {
  std::ifstream in(oracle::data_path("smiles_corpus.txt"));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string canon(std::string_view s) { return sm::canonicalize(sm::parse(s)).text; }

}  // namespace

TEST(SmilesParse, AtomsBondsAndHydrogens) {
  const auto g = sm::parse("CC(=O)O");
  ASSERT_EQ(g.atom_count(), 4u);
  EXPECT_EQ(g.atoms()[0].hydrogens, 3);
  EXPECT_EQ(g.atoms()[1].hydrogens, 0);
  EXPECT_EQ(g.atoms()[3].hydrogens, 1);
  ASSERT_EQ(g.bonds().size(), 3u);
  EXPECT_EQ(g.bonds()[1].order, sm::BondOrder::kDouble);

  const auto ring = sm::parse("c1ccccc1");
  EXPECT_EQ(ring.bonds().size(), 6u);
  for (const auto& a : ring.atoms()) {
    EXPECT_TRUE(a.aromatic);
    EXPECT_EQ(a.hydrogens, 1);
  }
  const auto charged = sm::parse("[NH4+]");
  EXPECT_EQ(charged.atoms()[0].charge, 1);
  EXPECT_EQ(charged.atoms()[0].hydrogens, 4);
  const auto pyrrole = sm::parse("c1cc[nH]c1");
  EXPECT_EQ(pyrrole.atoms()[3].hydrogens, 1);
  EXPECT_EQ(sm::parse("C%12CC%12").bonds().size(), 3u);
  EXPECT_EQ(sm::parse("Cl.Cl").bonds().size(), 0u);
}

TEST(SmilesParse, GrammarErrors) {
  for (const std::string text : {"C1CC", "C(C", "CC)", "[Xx]", "", "C==C", "C%1"}) {
    try {
      sm::parse(text);
      ADD_FAILURE() << text;
    } catch (const sm::SmilesError& e) {
      EXPECT_EQ(e.category(), ErrorCategory::kParse);
      EXPECT_LE(e.offset(), text.size());
    }
  }
  try {
    sm::parse("CC)");
  } catch (const sm::SmilesError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
}

TEST(SmilesParse, StereoIsDiscardedWithWarning) {
  sm::ParseDiagnostics d;
  sm::parse("C[C@H](N)C(=O)O", &d);
  EXPECT_TRUE(d.stereo_discarded);
  EXPECT_FALSE(d.warnings.empty());
  EXPECT_EQ(canon("F/C=C/F"), canon("FC=CF"));
}

TEST(Canonical, SpellingsAgree) {
  EXPECT_EQ(canon("OCC"), canon("CCO"));
  EXPECT_EQ(canon("C(C)O"), canon("OCC"));
  EXPECT_EQ(canon("c1ccccc1O"), canon("Oc1ccccc1"));
  EXPECT_EQ(canon("C1CCCCC1"), canon("C1CCCCC1"));
  EXPECT_NE(canon("CCO"), canon("COC"));
  EXPECT_NE(canon("c1ccccc1"), canon("C1CCCCC1"));
}

TEST(Canonical, PermutationInvariance) {
  util::SeededRng rng(17);
  for (int i = 0; i < 100; ++i) {
    const auto g = oracle::random_molecule(rng, 2 + rng.below(14));
    const auto expected = sm::canonicalize(g).text;
    for (int p = 0; p < 5; ++p) {
      const auto perm = oracle::random_permutation(rng, g.atom_count());
      EXPECT_EQ(sm::canonicalize(g.permuted(perm)).text, expected);
    }
  }
}

TEST(Canonical, SymmetricGraphs) {
  // Highly symmetric cages exercise the tie-breaking search.
  for (const std::string s : {"C12C3C4C1C5C2C3C45", "C1CC2CCC1CC2", "C1CCC2(CC1)CCCCC2"}) {
    const auto g = sm::parse(s);
    util::SeededRng rng(s.size());
    const auto expected = sm::canonicalize(g).text;
    for (int p = 0; p < 10; ++p) {
      EXPECT_EQ(sm::canonicalize(g.permuted(oracle::random_permutation(rng, g.atom_count()))).text,
                expected)
          << s;
    }
  }
}

TEST(Canonical, AgreesWithIsomorphismOracle) {
  util::SeededRng rng(23);
  std::map<std::string, std::vector<sm::MoleculeGraph>> by_key;
  std::map<std::string, std::string> key_of_canon;
  for (int i = 0; i < 400; ++i) {
    auto g = oracle::random_molecule(rng, 1 + rng.below(6));
    const auto c = sm::canonicalize(g).text;
    const auto key = oracle::invariant_key(g);
    auto [it, inserted] = key_of_canon.emplace(c, key);
    EXPECT_EQ(it->second, key) << "equal canonical forms for graphs with different invariants: " << c;
    by_key[key].push_back(std::move(g));
  }
  for (const auto& [key, graphs] : by_key) {
    for (std::size_t a = 0; a < graphs.size(); ++a) {
      for (std::size_t b = a + 1; b < graphs.size(); ++b) {
        EXPECT_EQ(oracle::isomorphic(graphs[a], graphs[b]),
                  sm::canonicalize(graphs[a]) == sm::canonicalize(graphs[b]));
      }
    }
  }
}

TEST(Canonical, RoundTripFixedPointOnCorpus) {
  for (const auto& s : corpus()) {
    const auto c = canon(s);
    EXPECT_EQ(canon(c), c) << s;
    EXPECT_TRUE(oracle::isomorphic(sm::parse(s), sm::parse(c))) << s;
  }
}

TEST(Canonical, WriteSmilesParsesBackToSameGraph) {
  util::SeededRng rng(31);
  for (int i = 0; i < 100; ++i) {
    const auto g = oracle::random_molecule(rng, 1 + rng.below(7));
    const auto text = sm::canonicalize(g).text;
    EXPECT_TRUE(oracle::isomorphic(g, sm::parse(text))) << text;
  }
}

TEST(Compare, EquivalenceAndAromaticity) {
  const auto c = sm::compare("c1ccccc1", "C1=CC=CC=C1");
  EXPECT_FALSE(c.equivalent);
  EXPECT_TRUE(c.aromatic_normalized_equivalent);
  EXPECT_TRUE(sm::equivalent("OCC", "CCO"));
  EXPECT_FALSE(sm::equivalent("CCO", "C1CC"));
  const auto bad = sm::compare("C1CC", "CCO");
  EXPECT_TRUE(bad.parse_failure);
  EXPECT_FALSE(bad.equivalent);
  EXPECT_TRUE(sm::compare("C[C@H](N)C(=O)O", "CC(N)C(=O)O").stereo_discarded);
  EXPECT_EQ(sm::try_canonical("C(("), std::nullopt);
}

TEST(ChemicalFacts, ElementsCountsScaffold) {
  const auto g = sm::parse("FC(F)(F)c1ccc(Br)cc1");
  EXPECT_EQ(sm::element_types(g), (std::vector<std::string>{"C", "Br", "F"}));
  EXPECT_EQ(sm::count_element(g, "C"), 7u);
  EXPECT_EQ(sm::canonicalize(sm::ring_scaffold(g)).text, canon("c1ccccc1"));
  EXPECT_EQ(sm::ring_scaffold(sm::parse("CCCO")).atom_count(), 0u);
  const auto linked = sm::ring_scaffold(sm::parse("c1ccccc1CCc1ccccc1C"));
  EXPECT_EQ(sm::canonicalize(linked).text, canon("c1ccccc1CCc1ccccc1"));
}

TEST(Graph, Validation) {
  EXPECT_THROW(sm::MoleculeGraph({{"C"}, {"C"}}, {{0, 5}}), DomainError);
  EXPECT_THROW(sm::MoleculeGraph({{"C"}, {"C"}}, {{0, 1}, {1, 0}}), DomainError);
  EXPECT_THROW(sm::MoleculeGraph({{"Qq"}}, {}), DomainError);
  EXPECT_THROW(sm::MoleculeGraph({{"Cl", 0, 0, true}}, {}), DomainError);
}
