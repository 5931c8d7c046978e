#pragma once

#include "absynth/qelim.hpp"
#include "absynth/semantics.hpp"

namespace absynth {

/// One template row  form <= param, the linear form over state variables.
struct TemplateRow {
  VarId param;
  LinTerm form;
};

struct Template {
  std::vector<TemplateRow> rows;
  std::string label;  // program-location name for cut-set problems
};

struct ExtensionFlags {
  bool infinities = false;
  bool emptiness = false;
};

/// Companion parameters of a row under the infinities extension.
inline VarId finitePartParam(const VarId& p) { return VarId(p.name + "#b", p.sort); }
inline VarId infinityFlagParam(const VarId& p) { return VarId(p.name + "#inf", p.sort); }
inline VarId emptinessParam(const Template& t) {
  return VarId((t.label.empty() ? std::string("dom") : t.label) + "#nonempty",
               VarSort::Parameter);
}

enum class TemplateKind { Interval, Octagon, Custom };

inline Template makeTemplate(TemplateKind kind, const std::vector<VarId>& vars,
                             const std::vector<LinTerm>& customForms = {}) {
  Template t;
  std::vector<LinTerm> forms;
  switch (kind) {
    case TemplateKind::Interval:
      for (const auto& v : vars) {
        forms.push_back(LinTerm::var(v));
        forms.push_back(-LinTerm::var(v));
      }
      break;
    case TemplateKind::Octagon:
      for (const auto& v : vars) {
        forms.push_back(LinTerm::var(v));
        forms.push_back(-LinTerm::var(v));
      }
      for (size_t i = 0; i < vars.size(); ++i)
        for (size_t j = i + 1; j < vars.size(); ++j) {
          LinTerm a = LinTerm::var(vars[i]), b = LinTerm::var(vars[j]);
          forms.push_back(a + b);
          forms.push_back(a - b);
          forms.push_back(-a + b);
          forms.push_back(-a - b);
        }
      break;
    case TemplateKind::Custom: forms = customForms; break;
  }
  std::vector<LinTerm> seen;
  for (size_t i = 0; i < forms.size(); ++i) {
    Atom canon(forms[i], Rel::Le);
    for (const auto& other : seen)
      if (other == canon.lhs()) throw DuplicateForm(forms[i].str());
    seen.push_back(canon.lhs());
    t.rows.push_back(TemplateRow{VarId("p" + std::to_string(i + 1), VarSort::Parameter),
                                 canon.lhs()});
  }
  return t;
}

/// Parameters of a template under the given extensions, in row order.
inline std::vector<VarId> templateParams(const Template& t, const ExtensionFlags& ext) {
  std::vector<VarId> ps;
  for (const auto& r : t.rows) {
    if (ext.infinities) {
      ps.push_back(infinityFlagParam(r.param));
      ps.push_back(finitePartParam(r.param));
    } else {
      ps.push_back(r.param);
    }
  }
  if (ext.emptiness) ps.push_back(emptinessParam(t));
  return ps;
}

/// Conjunction  /\ L_i(s) <= p_i  over the state variables (primed if asked).
/// With infinities, each row becomes  (p#inf > 0) || (L <= p#b); with
/// emptiness, the block is guarded by a 0/1 parameter whose zero value
/// denotes the empty set.
inline Formula templateFormula(const Template& t, const ExtensionFlags& ext,
                               bool primedState = false) {
  std::vector<Formula> rows;
  for (const auto& r : t.rows) {
    LinTerm form = r.form;
    if (primedState) {
      std::map<VarId, LinTerm> sigma;
      for (const auto& [v, c] : r.form.coeffs()) sigma.emplace(v, LinTerm::var(primed(v)));
      form = r.form.substituted(sigma);
    }
    if (ext.infinities) {
      rows.push_back(Formula::orF({Formula::gt(LinTerm::var(infinityFlagParam(r.param)), LinTerm()),
                                   Formula::le(form, LinTerm::var(finitePartParam(r.param)))}));
    } else {
      rows.push_back(Formula::le(form, LinTerm::var(r.param)));
    }
  }
  Formula body = Formula::andF(std::move(rows));
  if (ext.emptiness)
    body = Formula::andF({Formula::ge(LinTerm::var(emptinessParam(t)), LinTerm(Rational(1))), body});
  return body;
}

/// Zero/one range constraints for the extension parameters; conjoined with
/// the admissibility formula by the synthesis layer.
inline Formula extensionSideConditions(const Template& t, const ExtensionFlags& ext) {
  std::vector<Formula> side;
  auto zeroOne = [](const VarId& v) {
    LinTerm t0 = LinTerm::var(v);
    return Formula::orF({Formula::eq(t0, LinTerm()), Formula::eq(t0, LinTerm(Rational(1)))});
  };
  if (ext.infinities)
    for (const auto& r : t.rows) side.push_back(zeroOne(infinityFlagParam(r.param)));
  if (ext.emptiness) side.push_back(zeroOne(emptinessParam(t)));
  return Formula::andF(std::move(side));
}

struct PartitionCell {
  Formula guard;  // over state variables
  Template tpl;
};

struct PartitionedTemplate {
  std::vector<PartitionCell> cells;
};

struct PartitionDiagnostics {
  bool pass = true;
  std::vector<std::pair<size_t, size_t>> overlaps;  // guard pairs with common states
  Formula gap = Formula::falseF();                  // states covered by no guard

  std::string str() const {
    if (pass) return "pass";
    std::string s;
    for (auto [i, j] : overlaps)
      s += "overlap between cells " + std::to_string(i) + " and " + std::to_string(j) + "; ";
    if (!gap.isFalse()) s += "coverage gap: " + gap.str();
    return s;
  }
};

/// Checks pairwise disjointness and joint coverage of partition guards.
inline PartitionDiagnostics checkPartition(const PartitionedTemplate& pt,
                                           QeMethod method = QeMethod::LoosWeispfenning) {
  PartitionDiagnostics d;
  for (size_t i = 0; i < pt.cells.size(); ++i)
    for (size_t j = i + 1; j < pt.cells.size(); ++j) {
      if (isSatFormula(Formula::andF({pt.cells[i].guard, pt.cells[j].guard}))) {
        d.pass = false;
        d.overlaps.emplace_back(i, j);
      }
    }
  std::vector<Formula> guards;
  for (const auto& c : pt.cells) guards.push_back(c.guard);
  Formula uncovered = Formula::notF(Formula::orF(std::move(guards)));
  Formula gap = eliminate(uncovered, method);
  if (isSatFormula(gap)) {
    d.pass = false;
    d.gap = toDNF(gap, true);
  }
  return d;
}

/// Interval presentation: a row whose form is a single negated variable is a
/// lower bound, shown to the user as  name = -p. The map records -1 for such
/// parameters and +1 otherwise, covering infinity companions as well.
inline std::map<VarId, Rational> displaySigns(const Template& t, const ExtensionFlags& ext) {
  std::map<VarId, Rational> signs;
  for (const auto& r : t.rows) {
    bool lower = r.form.coeffs().size() == 1 && r.form.constant() == 0 &&
                 r.form.coeffs().begin()->second < 0;
    Rational s(lower ? -1 : 1);
    if (ext.infinities) {
      signs[finitePartParam(r.param)] = s;
      signs[infinityFlagParam(r.param)] = Rational(1);
    } else {
      signs[r.param] = s;
    }
  }
  if (ext.emptiness) signs[emptinessParam(t)] = Rational(1);
  return signs;
}

inline Formula toDisplay(const Formula& f, const std::map<VarId, Rational>& signs) {
  std::map<VarId, LinTerm> sigma;
  for (const auto& [p, s] : signs)
    if (s < 0) sigma.emplace(p, -LinTerm::var(p));
  return f.substituted(sigma);
}

}  // namespace absynth
