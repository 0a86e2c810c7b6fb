#include <gtest/gtest.h>

#include <cmath>

#include "ptnls/catalog.hpp"
#include "ptnls/jet/calculus.hpp"
#include "ptnls/jet/equiv.hpp"
#include "ptnls/jet/parse.hpp"

using namespace ptnls;
using jet::JetSampler;
using jet::parse_expr;

namespace {

constexpr std::uint64_t kSeed = 99;

bool equiv(const Expr& a, const Expr& b, const ParamValues& pv = {}, double tol = 1e-10) {
  JetSampler sampler(kSeed, pv);
  return jet::expr_equiv(a, b, 100, tol, sampler).equivalent;
}

Expr P(const char* s) { return parse_expr(s); }

const std::string kMini =
    "* | energy | Q1 | v_t | m\n"
    "* | energy | Q2 | u_t | m\n"
    "* | charge | Q1 | u | m\n"
    "* | charge | Q2 | -v | m\n"
    "1a | - | a | x^2/2 | a\n"
    "1a | - | b | x | b\n";

void expect_catalog_error(const std::string& text, const std::string& needle) {
  try {
    Catalog::parse(text, "t.txt");
    FAIL() << "expected CatalogError for: " << text;
  } catch (const CatalogError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Names, CasesAndKinds) {
  for (CaseId c : kAllCases) EXPECT_EQ(case_from_name(case_name(c)), c);
  EXPECT_EQ(case_from_name("Case1a"), CaseId::Case1a);
  EXPECT_EQ(case_from_name("case2"), CaseId::Case2);
  EXPECT_FALSE(case_from_name("9").has_value());
  EXPECT_FALSE(case_from_name("1d").has_value());
  for (Kind k : kAllKinds) EXPECT_EQ(kind_from_name(kind_name(k)), k);
  EXPECT_FALSE(kind_from_name("momentum").has_value());
}

TEST(Loader, MinimalCatalogParses) {
  const Catalog c = Catalog::parse(kMini + "# comment\n\n1a | energy | Ru | -2*eps*x*\\\n  v_t | anchor | with bar\n");
  const auto* e = c.find("1a", "energy", "Ru");
  ASSERT_NE(e, nullptr);
  EXPECT_TRUE(jet::structurally_equal(e->expr, P("-2*eps*x*v_t")));
  EXPECT_EQ(e->anchor, "anchor | with bar");
  EXPECT_EQ(e->line, 9);
  EXPECT_TRUE(equiv(c.case_spec(CaseId::Case1a).a, P("x^2/2")));
}

TEST(Loader, Errors) {
  expect_catalog_error(kMini + "1d | energy | Ru | u | a\n", "case");
  expect_catalog_error(kMini + "1a | momentum | Ru | u | a\n", "kind");
  expect_catalog_error(kMini + "1a | energy | Rw | u | a\n", "slot");
  expect_catalog_error(kMini + "1a | energy | Ru:guess | u | a\n", "variant");
  expect_catalog_error(kMini + "1a | energy | Ru | u +  | a\n", "t.txt:7");
  expect_catalog_error(kMini + "1a | energy | Ru | u | a\n1a | energy | Ru | v | a\n", "duplicate");
  expect_catalog_error(kMini + "1a | energy | a | x | a\n", "-");
  expect_catalog_error(kMini + "1a | - | E1 | u_t + u_x | a\n1a | - | E1 | u | a\n", "duplicate");
  expect_catalog_error(kMini + "1a | energy | kappa | eps | a\n", "kappa");
  expect_catalog_error(kMini + "1c | - | a | x^2/2 + u | a\n", "a");
  expect_catalog_error(kMini + "1a | energy | Ru | u \\\n", "continuation");
  expect_catalog_error(kMini + "1a | energy | Ru\n", "t.txt:7");
  EXPECT_THROW(Catalog::load_file("/nonexistent/catalog.txt"), CatalogError);
}

TEST(Builtin, EveryEntryParsesFromItsText) {
  const Catalog& cat = Catalog::builtin();
  EXPECT_GT(cat.entries().size(), 60U);
  for (const auto& e : cat.entries()) {
    const Expr fresh = parse_expr(e.text);
    EXPECT_TRUE(jet::structurally_equal(fresh, e.expr)) << e.text;
    EXPECT_FALSE(e.anchor.empty());
  }
}

TEST(Builtin, FileAndEmbeddedCopiesAgree) {
  const Catalog file = Catalog::load_file(PTNLS_CATALOG_PATH);
  const Catalog& built = Catalog::builtin();
  ASSERT_EQ(file.entries().size(), built.entries().size());
  for (std::size_t i = 0; i < file.entries().size(); ++i) {
    EXPECT_EQ(file.entries()[i].text, built.entries()[i].text);
  }
}

TEST(Multiplier, Table) {
  const Multiplier e = multiplier(Kind::Energy);
  EXPECT_TRUE(jet::structurally_equal(e.Q1, P("v_t")));
  EXPECT_TRUE(jet::structurally_equal(e.Q2, P("u_t")));
  const Multiplier c = multiplier(Kind::Charge);
  EXPECT_TRUE(jet::structurally_equal(c.Q1, P("u")));
  EXPECT_TRUE(equiv(c.Q2, P("-v")));
}

TEST(BuildSystem, Case1aAtZeroEps) {
  ParamValues pv;
  pv.eps = 0.0;
  const PdeSystem sys = build_system(case_spec(CaseId::Case1a));
  const Expr e1 = jet::substitute(sys.E1, {{jet::Param::Eps, Expr(0)}});
  EXPECT_TRUE(equiv(e1, P("u_t + (1/2)*v_xx - (x^2/2)*v + 2*mu^2*sigma*exp(-alpha*x^2)*(u^2+v^2)*v")));
  EXPECT_TRUE(equiv(sys.E1, e1 + P("-eps*x*u")));
  EXPECT_TRUE(equiv(jet::partial(sys.E1, jet::Param::Eps), P("-x*u")));
  EXPECT_TRUE(equiv(jet::partial(sys.E2, jet::Param::Eps), P("x*v")));
}

TEST(BuildSystem, NoGainLossTermsAtZeroEps) {
  for (CaseId c : kAllCases) {
    const CaseSpec cs = case_spec(c);
    const PdeSystem sys = build_system(cs);
    const PdeSystem ref = build_system(CaseSpec{c, cs.a, Expr(0), cs.nonlinearity_coeff});
    ParamValues pv;
    pv.eps = 0.0;
    EXPECT_TRUE(equiv(sys.E1, ref.E1, pv)) << case_name(c);
    EXPECT_TRUE(equiv(sys.E2, ref.E2, pv)) << case_name(c);
  }
}

TEST(BuildSystem, Case2WithoutWellsIsHarmonic) {
  ParamValues pv;
  pv.g = 0.0;
  pv.sigma = -0.7;
  EXPECT_TRUE(equiv(case_spec(CaseId::Case2).a, P("x^2/2"), pv));
}

TEST(BuildSystem, MatchesTranscribedEquations) {
  const Catalog& cat = Catalog::builtin();
  for (CaseId c : kAllCases) {
    const PdeSystem built = build_system(cat.case_spec(c));
    const PdeSystem printed = cat.transcribed_system(c);
    EXPECT_TRUE(equiv(built.E1, printed.E1)) << case_name(c);
    EXPECT_TRUE(equiv(built.E2, printed.E2)) << case_name(c);
  }
}

TEST(BuildSystem, NumericParametersBindExactly) {
  ParamValues pv;
  pv.eps = 0.25;
  pv.mu = 2.0;
  const PdeSystem sym = build_system(case_spec(CaseId::Case2));
  const PdeSystem num = build_system(case_spec(CaseId::Case2), pv);
  EXPECT_FALSE(num.E1.depends_on(jet::Param::Eps));
  EXPECT_FALSE(num.E2.depends_on(jet::Param::Mu));
  EXPECT_TRUE(equiv(sym.E1, num.E1, pv, 1e-13));
  EXPECT_TRUE(equiv(sym.E2, num.E2, pv, 1e-13));
  // 1/2 stays exact after binding integer-valued parameters
  EXPECT_TRUE(bind_params(P("mu/2"), pv).number()->exact());
}

TEST(Case1b, ReducesToCase1aWithoutGainLoss) {
  ParamValues pv;
  pv.eps = 0.0;
  const PdeSystem a = build_system(case_spec(CaseId::Case1a));
  const PdeSystem b = build_system(case_spec(CaseId::Case1b));
  EXPECT_TRUE(equiv(a.E1, b.E1, pv));
  EXPECT_TRUE(equiv(a.E2, b.E2, pv));
  pv.eps = 0.05;
  EXPECT_FALSE(equiv(a.E1, b.E1, pv));
}

TEST(Case1b, ChargeDensityAtZeroEps) {
  const auto cv = conserved_vector(CaseId::Case1b, Kind::Charge);
  ASSERT_TRUE(cv.has_value());
  EXPECT_FALSE(cv->Tx.has_value());
  ParamValues pv;
  pv.eps = 0.0;
  EXPECT_TRUE(equiv(cv->Tt, P("-(1/2)*(u^2+v^2)"), pv));
}

TEST(ConservedVector, Examples) {
  const auto c = conserved_vector(CaseId::Case1a, Kind::Charge);
  ASSERT_TRUE(c.has_value());
  EXPECT_TRUE(equiv(c->Tt, P("(1/5)*t*eps*x*u^2 + (1/5)*t*eps*x*v^2 - (1/2)*u^2 - (1/2)*v^2")));
  ASSERT_TRUE(c->complex_density.has_value());
  EXPECT_TRUE(equiv(*c->complex_density, P("((1/5)*t*eps*x - 1/2)*(u^2+v^2)")));
  EXPECT_FALSE(conserved_vector(CaseId::Case1c, Kind::Energy).has_value());
  EXPECT_FALSE(conserved_vector(CaseId::Case1c, Kind::Charge).has_value());
  EXPECT_FALSE(conserved_vector(CaseId::Case1b, Kind::Energy)->Tx.has_value());
  for (CaseId k : {CaseId::Case1a, CaseId::Case2}) {
    for (Kind kind : kAllKinds) EXPECT_TRUE(conserved_vector(k, kind)->Tx.has_value());
  }
}

TEST(ConservedVector, DensityFormsAgree) {
  const std::pair<CaseId, Kind> both[] = {
      {CaseId::Case1a, Kind::Energy}, {CaseId::Case1a, Kind::Charge}, {CaseId::Case2, Kind::Charge}};
  for (const auto& [c, k] : both) {
    const auto cv = conserved_vector(c, k);
    ASSERT_TRUE(cv && cv->complex_density) << case_name(c) << " " << kind_name(k);
    EXPECT_TRUE(equiv(cv->Tt, *cv->complex_density, {}, 1e-12)) << case_name(c) << " " << kind_name(k);
  }
}

TEST(ResidualTarget, Examples) {
  const auto e = residual_target(CaseId::Case1a, Kind::Energy);
  ASSERT_TRUE(e.has_value());
  EXPECT_TRUE(equiv(e->Ru, P("-2*eps*x*v_t")));
  EXPECT_TRUE(equiv(e->Rv, P("2*eps*x*u_t")));
  const auto c = residual_target(CaseId::Case2, Kind::Charge);
  ASSERT_TRUE(c.has_value());
  EXPECT_TRUE(equiv(c->Ru, P("3*eps*x*exp(-x^2)*u")));
  EXPECT_TRUE(equiv(c->Rv, P("3*eps*x*exp(-x^2)*v")));
  EXPECT_FALSE(residual_target(CaseId::Case1b, Kind::Charge).has_value());
  const auto d = Catalog::builtin().derived_residual(CaseId::Case1b, Kind::Charge);
  ASSERT_TRUE(d.has_value());
  EXPECT_TRUE(d->derived);
}

TEST(ResidualTarget, LinearInEpsAndZeroWithoutGainLoss) {
  int printed = 0;
  for (CaseId c : kAllCases) {
    for (Kind k : kAllKinds) {
      const auto r = residual_target(c, k);
      if (!r) continue;
      ++printed;
      for (const Expr& e : {r->Ru, r->Rv}) {
        JetSampler s(kSeed);
        for (int i = 0; i < 100; ++i) {
          const jet::JetPoint p = s.next();
          ParamValues pv;
          const double v1 = jet::eval(e, p, pv);
          pv.eps *= 2.0;
          const double v2 = jet::eval(e, p, pv);
          EXPECT_NEAR(v2, 2.0 * v1, 1e-12 * std::max(1.0, std::abs(v2)));
          pv.eps = 0.0;
          EXPECT_EQ(jet::eval(e, p, pv), 0.0);
        }
      }
    }
  }
  EXPECT_EQ(printed, 7);
}

TEST(Corrections, RawReadingsAreKeptAndDiffer) {
  const Catalog& cat = Catalog::builtin();
  const auto all = cat.corrections();
  EXPECT_GE(all.size(), 9U);
  for (const auto& c : all) {
    EXPECT_NE(c.raw_text, c.corrected_text) << c.case_key << " " << c.kind_key << " " << c.slot;
  }
  const auto one = cat.corrections(CaseId::Case1c, Kind::Energy);
  ASSERT_FALSE(one.empty());
  EXPECT_EQ(one.front().slot, "Q1");
  // raw multiplier for that block is the charge pair
  const Multiplier raw = cat.multiplier(CaseId::Case1c, Kind::Energy, Reading::Raw);
  EXPECT_TRUE(jet::structurally_equal(raw.Q1, P("u")));
}

TEST(Kappa, CorrectedSigns) {
  EXPECT_EQ(conserved_vector(CaseId::Case1a, Kind::Energy)->kappa, -1);
  EXPECT_EQ(conserved_vector(CaseId::Case1a, Kind::Charge)->kappa, -1);
  EXPECT_EQ(conserved_vector(CaseId::Case2, Kind::Energy)->kappa, 1);
  EXPECT_EQ(conserved_vector(CaseId::Case2, Kind::Charge)->kappa, -1);
  EXPECT_EQ(conserved_vector(CaseId::Case1a, Kind::Charge, Reading::Raw)->kappa, 1);
}
