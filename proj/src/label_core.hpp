#pragma once

#include <string>
#include <vector>

#include "mstsim/labels.hpp"

// Clause logic shared by the one-round verifiers and the exhaustive checker.
namespace mstsim::core {

struct Sym {
    char r, e, p, a;  // ROOTS, EndP, PARENTS, AGG entries at one level
};

inline Sym sym(const LabelBundle& b, int j) { return {b.roots[j], b.endp[j], b.parents[j], b.agg[j]}; }

// RS0-RS4 (own string only).
void rs_local(const std::string& r, bool is_root, int ell, std::vector<std::string>& out);
// RS5 against the parent's string.
bool rs_parent_ok(const std::string& r, const std::string& parent_roots);
// Once v is inside its parent's fragment at level j, it has a fragment at a higher level
// exactly when the parent has one.
bool rs_nest_ok(const std::string& r, const std::string& parent_roots);
int agg_expected(char e, const std::vector<Sym>& kids);
// Per-level EPS clauses; `par` is null at the root, `above1` = ROOTS has a '1' above j,
// `gap` = some level above j where v has no fragment but its parent has one.
void eps_level(const Sym& me, const Sym* par, const std::vector<Sym>& kids, int j, int ell, bool above1, bool gap,
               std::vector<std::string>& out);
// The `gap` flag of eps_level.
bool star_gap(const std::string& r, const std::string& parent_roots, int j);

}  // namespace mstsim::core
