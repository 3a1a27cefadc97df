#include "cforge/quasimorphism.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace cforge {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

std::int64_t floor_div_i64(std::int64_t a, std::int64_t q) {
    std::int64_t d = a / q;
    if ((a % q != 0) && ((a < 0) != (q < 0))) --d;
    return d;
}

std::int64_t parse_i64(const std::string& text) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used != text.size()) bad("trailing characters in integer: " + text);
        return v;
    } catch (const std::invalid_argument&) {
        bad("invalid integer: " + text);
    } catch (const std::out_of_range&) {
        bad("integer out of range: " + text);
    }
}

// Splits at `sep` characters that are not nested inside parentheses.
std::vector<std::string> split_top_level(const std::string& text, char sep) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char ch : text) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == sep && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    return parts;
}

std::vector<std::string> split_plain(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    return parts;
}

bool commute(const GroupDescriptor& H, const GroupElement& x, const GroupElement& y) {
    return compose(H, x, y) == compose(H, y, x);
}

// Verifies that generator images respect the domain's defining relations;
// `offset` indexes into `images` for the current (sub)group's generators.
void check_relations(const GroupDescriptor& G, const GroupDescriptor& H,
                     const std::vector<GroupElement>& images, int offset) {
    switch (G.kind()) {
        case GroupKind::FreeGroup:
            return;
        case GroupKind::Lattice:
            for (int i = 0; i < G.rank(); ++i)
                for (int j = i + 1; j < G.rank(); ++j)
                    if (!commute(H, images[offset + i], images[offset + j]))
                        bad("generator images must commute for a lattice domain");
            return;
        case GroupKind::BaumslagSolitar12: {
            const GroupElement& a = images[offset];
            const GroupElement& b = images[offset + 1];
            GroupElement lhs = compose(H, compose(H, b, a), invert(H, b));
            if (lhs != compose(H, a, a))
                bad("generator images violate the defining relation b a b^-1 = a^2");
            return;
        }
        case GroupKind::Product: {
            int left_count = G.left().generator_count();
            check_relations(G.left(), H, images, offset);
            check_relations(G.right(), H, images, offset + left_count);
            for (int i = 0; i < left_count; ++i)
                for (int j = 0; j < G.right().generator_count(); ++j)
                    if (!commute(H, images[offset + i], images[offset + left_count + j]))
                        bad("images of commuting generators must commute");
            return;
        }
    }
}

std::int64_t to_i64_checked(const BigInt& v) {
    if (v < std::numeric_limits<std::int64_t>::min() || v > std::numeric_limits<std::int64_t>::max())
        bad("element exponent too large to evaluate");
    return static_cast<std::int64_t>(v);
}

// Canonical syllable list (generator index 1-based, signed exponent);
// recursive over product factors with shifted indices.
void append_syllables(const GroupDescriptor& G, const GroupElement& g, int offset,
                      std::vector<std::pair<int, std::int64_t>>& out) {
    switch (G.kind()) {
        case GroupKind::FreeGroup: {
            const auto& letters = g.as_free().letters;
            std::size_t i = 0;
            while (i < letters.size()) {
                std::size_t j = i;
                while (j < letters.size() && letters[j] == letters[i]) ++j;
                int idx = std::abs(letters[i]);
                std::int64_t count = static_cast<std::int64_t>(j - i);
                out.emplace_back(offset + idx, letters[i] > 0 ? count : -count);
                i = j;
            }
            return;
        }
        case GroupKind::Lattice: {
            const auto& coords = g.as_lattice().coords;
            for (std::size_t i = 0; i < coords.size(); ++i)
                if (coords[i] != 0) out.emplace_back(offset + static_cast<int>(i) + 1, coords[i]);
            return;
        }
        case GroupKind::BaumslagSolitar12: {
            const BsElem& e = g.as_bs();
            if (e.x.is_zero()) {
                if (e.k != 0) out.emplace_back(offset + 2, e.k);
                return;
            }
            // b^-p a^m b^(p+k) with x = m * 2^-p, m odd unless p = 0
            std::int64_t p = e.x.exp() < 0 ? -e.x.exp() : 0;
            BigInt m = e.x.num();
            if (e.x.exp() > 0) m <<= e.x.exp();
            if (p > 0) out.emplace_back(offset + 2, -p);
            out.emplace_back(offset + 1, to_i64_checked(m));
            if (p + e.k != 0) out.emplace_back(offset + 2, p + e.k);
            return;
        }
        case GroupKind::Product: {
            const auto& parts = g.as_product().parts;
            append_syllables(G.left(), parts[0], offset, out);
            append_syllables(G.right(), parts[1], offset + G.left().generator_count(), out);
            return;
        }
    }
}

GroupElement apply_hom(const GroupDescriptor& G, const GroupDescriptor& H,
                       const std::vector<GroupElement>& images, const GroupElement& g) {
    std::vector<std::pair<int, std::int64_t>> syl;
    append_syllables(G, g, 0, syl);
    GroupElement acc = identity(H);
    for (const auto& [idx, n] : syl) acc = compose(H, acc, element_pow(H, images[idx - 1], n));
    return acc;
}

// Occurrences of `pattern` in `text` as a contiguous subword.
std::int64_t count_occurrences(const std::vector<std::int32_t>& text,
                               const std::vector<std::int32_t>& pattern, BrooksCounting counting) {
    if (pattern.empty() || text.size() < pattern.size()) return 0;
    std::int64_t count = 0;
    std::size_t i = 0;
    while (i + pattern.size() <= text.size()) {
        bool hit = std::equal(pattern.begin(), pattern.end(), text.begin() + i);
        if (hit) {
            ++count;
            i += counting == BrooksCounting::Disjoint ? pattern.size() : 1;
        } else {
            ++i;
        }
    }
    return count;
}

std::vector<std::int32_t> inverse_word(const std::vector<std::int32_t>& w) {
    std::vector<std::int32_t> out(w.rbegin(), w.rend());
    for (auto& l : out) l = -l;
    return out;
}

GroupElement int_elem(std::int64_t v) { return GroupElement(LatticeVec{{v}}); }

}  // namespace

bool is_abelian(const GroupDescriptor& G) {
    switch (G.kind()) {
        case GroupKind::FreeGroup: return G.rank() == 1;
        case GroupKind::Lattice: return true;
        case GroupKind::BaumslagSolitar12: return false;
        case GroupKind::Product: return is_abelian(G.left()) && is_abelian(G.right());
    }
    return false;
}

Quasimorphism Quasimorphism::homomorphism(GroupDescriptor domain, GroupDescriptor codomain,
                                          std::vector<GroupElement> images) {
    if (static_cast<int>(images.size()) != domain.generator_count())
        bad("need one image per domain generator");
    for (auto& img : images) img = normalize(codomain, img);
    check_relations(domain, codomain, images, 0);
    Quasimorphism f;
    f.rule_ = QmRule::Homomorphism;
    f.domain_ = std::move(domain);
    f.codomain_ = std::move(codomain);
    f.images_ = std::move(images);
    return f;
}

Quasimorphism Quasimorphism::homomorphism_plus_bounded(
    GroupDescriptor domain, GroupDescriptor codomain, std::vector<GroupElement> images,
    std::map<GroupElement, GroupElement, ElementLess> bounded_table, GroupElement default_value) {
    if (!is_abelian(codomain))
        bad("bounded corrections need an abelian codomain to stay a quasimorphism");
    Quasimorphism f = homomorphism(std::move(domain), std::move(codomain), std::move(images));
    f.rule_ = QmRule::HomomorphismPlusBounded;
    for (const auto& [key, value] : bounded_table)
        f.bounded_table_.emplace(normalize(f.domain_, key), normalize(f.codomain_, value));
    f.bounded_default_ = normalize(f.codomain_, default_value);
    return f;
}

Quasimorphism Quasimorphism::brooks(GroupDescriptor domain, std::vector<std::int32_t> w,
                                    BrooksCounting counting) {
    if (domain.kind() != GroupKind::FreeGroup) bad("word counting needs a free domain");
    if (w.empty()) bad("counted word must be nonempty");
    GroupElement reduced = evaluate_word(domain, w);  // validates letters
    if (reduced.as_free().letters != w) bad("counted word must be reduced");
    Quasimorphism f;
    f.rule_ = QmRule::Brooks;
    f.domain_ = std::move(domain);
    f.codomain_ = GroupDescriptor::lattice(1);
    f.word_ = std::move(w);
    f.counting_ = counting;
    return f;
}

Quasimorphism Quasimorphism::rolli(GroupDescriptor domain, std::vector<std::int64_t> alpha_table) {
    if (domain.kind() != GroupKind::FreeGroup) bad("syllable sums need a free domain");
    if (alpha_table.empty()) bad("alpha table must be nonempty");
    Quasimorphism f;
    f.rule_ = QmRule::Rolli;
    f.domain_ = std::move(domain);
    f.codomain_ = GroupDescriptor::lattice(1);
    f.alpha_ = std::move(alpha_table);
    return f;
}

Quasimorphism Quasimorphism::floor_division(GroupDescriptor domain, std::int64_t q, int coord) {
    if (domain.kind() != GroupKind::Lattice) bad("floor division needs a lattice domain");
    if (q < 2) bad("floor divisor must be at least 2");
    if (coord < 1 || coord > domain.rank()) bad("floor coordinate out of range");
    Quasimorphism f;
    f.rule_ = QmRule::FloorDivision;
    f.domain_ = std::move(domain);
    f.codomain_ = GroupDescriptor::lattice(1);
    f.q_ = q;
    f.coord_ = coord;
    return f;
}

Quasimorphism Quasimorphism::compose_with_hom(Quasimorphism inner, Quasimorphism outer) {
    if (outer.rule_ != QmRule::Homomorphism) bad("outer map must be a homomorphism");
    if (!(outer.domain_ == inner.codomain_)) bad("outer domain must match inner codomain");
    Quasimorphism f;
    f.rule_ = QmRule::ComposeWithHom;
    f.domain_ = inner.domain_;
    f.codomain_ = outer.codomain_;
    f.inner_ = std::make_shared<const Quasimorphism>(std::move(inner));
    f.outer_ = std::make_shared<const Quasimorphism>(std::move(outer));
    return f;
}

Quasimorphism Quasimorphism::parse(const std::string& text, const GroupDescriptor& domain,
                                   const std::optional<GroupDescriptor>& codomain) {
    auto parse_hom_entries = [](const std::string& body, const GroupDescriptor& dom,
                                const GroupDescriptor& cod) {
        std::vector<GroupElement> images(dom.generator_count(), identity(cod));
        std::vector<bool> seen(dom.generator_count(), false);
        for (const std::string& entry : split_top_level(body, ';')) {
            auto arrow = entry.find("->");
            if (arrow == std::string::npos) bad("homomorphism entry needs '->': " + entry);
            std::string label = entry.substr(0, arrow);
            auto idx = dom.find_label(label);
            if (!idx) bad("unknown domain generator: " + label);
            if (seen[*idx]) bad("duplicate image for generator: " + label);
            seen[*idx] = true;
            images[*idx] = parse_element(cod, entry.substr(arrow + 2));
        }
        for (int i = 0; i < dom.generator_count(); ++i)
            if (!seen[i]) bad("missing image for generator: " + dom.generator_label(i));
        return images;
    };

    if (text.rfind("hom:", 0) == 0) {
        GroupDescriptor cod = codomain.value_or(domain);
        return homomorphism(domain, cod, parse_hom_entries(text.substr(4), domain, cod));
    }
    if (text.rfind("homplus:", 0) == 0) {
        GroupDescriptor cod = codomain.value_or(domain);
        auto parts = split_top_level(text.substr(8), '|');
        if (parts.size() < 2 || parts.size() > 3)
            bad("expected homplus:<hom>|<table>[|default=<value>]");
        auto images = parse_hom_entries(parts[0], domain, cod);
        std::map<GroupElement, GroupElement, ElementLess> table;
        if (!parts[1].empty())
            for (const std::string& entry : split_top_level(parts[1], ';')) {
                auto arrow = entry.find("->");
                if (arrow == std::string::npos) bad("bounded entry needs '->': " + entry);
                table[parse_element(domain, entry.substr(0, arrow))] =
                    parse_element(cod, entry.substr(arrow + 2));
            }
        GroupElement dflt = identity(cod);
        if (parts.size() == 3) {
            if (parts[2].rfind("default=", 0) != 0) bad("expected default=<value>");
            dflt = parse_element(cod, parts[2].substr(8));
        }
        return homomorphism_plus_bounded(domain, cod, std::move(images), std::move(table),
                                         std::move(dflt));
    }
    if (text.rfind("brooks:w=", 0) == 0) {
        std::string body = text.substr(9);
        BrooksCounting counting = BrooksCounting::Overlapping;
        auto opt = body.find(",counting=");
        if (opt != std::string::npos) {
            std::string mode = body.substr(opt + 10);
            if (mode == "overlapping")
                counting = BrooksCounting::Overlapping;
            else if (mode == "disjoint")
                counting = BrooksCounting::Disjoint;
            else
                bad("counting must be overlapping or disjoint");
            body = body.substr(0, opt);
        }
        GroupElement w = parse_element(domain, body);
        return brooks(domain, w.as_free().letters, counting);
    }
    if (text == "rolli:sign") return rolli(domain, {1});
    if (text.rfind("rolli:table=", 0) == 0) {
        std::vector<std::int64_t> table;
        for (const std::string& v : split_plain(text.substr(12), ',')) table.push_back(parse_i64(v));
        return rolli(domain, std::move(table));
    }
    if (text.rfind("floordiv:", 0) == 0) {
        std::int64_t q = 0;
        int coord = 1;
        bool have_q = false;
        for (const std::string& kv : split_plain(text.substr(9), ',')) {
            if (kv.rfind("q=", 0) == 0) {
                q = parse_i64(kv.substr(2));
                have_q = true;
            } else if (kv.rfind("coord=", 0) == 0) {
                coord = static_cast<int>(parse_i64(kv.substr(6)));
            } else {
                bad("unknown floordiv option: " + kv);
            }
        }
        if (!have_q) bad("floordiv needs q=<divisor>");
        return floor_division(domain, q, coord);
    }
    if (text.rfind("compose(", 0) == 0 && text.back() == ')') {
        auto parts = split_top_level(text.substr(8, text.size() - 9), ';');
        if (parts.size() != 2) bad("expected compose(<inner>;<outer>)");
        for (std::string& p : parts)
            if (p.size() >= 2 && p.front() == '(' && p.back() == ')') p = p.substr(1, p.size() - 2);
        Quasimorphism inner = parse(parts[0], domain);
        Quasimorphism outer = parse(parts[1], inner.codomain(), codomain);
        return compose_with_hom(std::move(inner), std::move(outer));
    }
    bad("unknown quasimorphism spec: " + text);
}

GroupElement Quasimorphism::eval(const GroupElement& g) const {
    GroupElement x = normalize(domain_, g);
    switch (rule_) {
        case QmRule::Homomorphism:
            return apply_hom(domain_, codomain_, images_, x);
        case QmRule::HomomorphismPlusBounded: {
            GroupElement h = apply_hom(domain_, codomain_, images_, x);
            auto it = bounded_table_.find(x);
            const GroupElement& b = it != bounded_table_.end() ? it->second : *bounded_default_;
            return compose(codomain_, h, b);
        }
        case QmRule::Brooks: {
            const auto& letters = x.as_free().letters;
            std::int64_t c = count_occurrences(letters, word_, counting_) -
                             count_occurrences(letters, inverse_word(word_), counting_);
            return int_elem(c);
        }
        case QmRule::Rolli: {
            const auto& letters = x.as_free().letters;
            std::int64_t sum = 0;
            std::size_t i = 0;
            while (i < letters.size()) {
                std::size_t j = i;
                while (j < letters.size() && letters[j] == letters[i]) ++j;
                // alpha clamps to its last table entry beyond the table
                std::size_t n = j - i;
                std::int64_t value =
                    alpha_[std::min(n, alpha_.size()) - 1] * (letters[i] > 0 ? 1 : -1);
                sum += value;
                i = j;
            }
            return int_elem(sum);
        }
        case QmRule::FloorDivision: {
            const auto& coords = x.as_lattice().coords;
            std::int64_t sum = 0;
            for (std::size_t i = 0; i < coords.size(); ++i)
                if (static_cast<int>(i) + 1 != coord_) sum += coords[i];
            return int_elem(sum + floor_div_i64(coords[coord_ - 1], q_));
        }
        case QmRule::ComposeWithHom:
            return outer_->eval(inner_->eval(x));
    }
    bad("corrupt quasimorphism rule");
}

std::string Quasimorphism::to_string() const {
    auto hom_entries = [this]() {
        std::string out;
        for (int i = 0; i < domain_.generator_count(); ++i) {
            if (i > 0) out += ";";
            out += domain_.generator_label(i) + "->" + format_element(codomain_, images_[i]);
        }
        return out;
    };
    switch (rule_) {
        case QmRule::Homomorphism:
            return "hom:" + hom_entries();
        case QmRule::HomomorphismPlusBounded: {
            std::string out = "homplus:" + hom_entries() + "|";
            bool first = true;
            for (const auto& [key, value] : bounded_table_) {
                if (!first) out += ";";
                first = false;
                out += format_element(domain_, key) + "->" + format_element(codomain_, value);
            }
            out += "|default=" + format_element(codomain_, *bounded_default_);
            return out;
        }
        case QmRule::Brooks: {
            std::string out = "brooks:w=" + format_element(domain_, GroupElement(FreeWord{word_}));
            if (counting_ == BrooksCounting::Disjoint) out += ",counting=disjoint";
            return out;
        }
        case QmRule::Rolli: {
            if (alpha_ == std::vector<std::int64_t>{1}) return "rolli:sign";
            std::string out = "rolli:table=";
            for (std::size_t i = 0; i < alpha_.size(); ++i) {
                if (i > 0) out += ",";
                out += std::to_string(alpha_[i]);
            }
            return out;
        }
        case QmRule::FloorDivision:
            return "floordiv:q=" + std::to_string(q_) + ",coord=" + std::to_string(coord_);
        case QmRule::ComposeWithHom:
            return "compose((" + inner_->to_string() + ");(" + outer_->to_string() + "))";
    }
    bad("corrupt quasimorphism rule");
}

DefectReport defect_observed(const Quasimorphism& f, const Ball& window,
                             const ProperMetric& codomain_metric, const Budget& budget) {
    const GroupDescriptor& G = f.domain();
    const GroupDescriptor& H = f.codomain();

    std::vector<GroupElement> elems = window.elements();
    // the identity pair is always part of the report
    if (!window.contains(identity(G))) elems.push_back(identity(G));

    std::vector<GroupElement> fx, fx_inv;
    fx.reserve(elems.size());
    for (const GroupElement& x : elems) fx.push_back(f.eval(x));
    for (const GroupElement& v : fx) fx_inv.push_back(invert(H, v));

    DefectReport report;
    report.window_radius = window.radius;
    std::set<GroupElement, ElementLess> left, right;
    long long pairs = 0;
    for (std::size_t i = 0; i < elems.size(); ++i) {
        for (std::size_t j = 0; j < elems.size(); ++j) {
            charge_pairs(budget, ++pairs, "defect pair scan");
            GroupElement fxy = f.eval(compose(G, elems[i], elems[j]));
            GroupElement dl = compose(H, compose(H, fx_inv[j], fx_inv[i]), fxy);
            GroupElement dr = compose(H, compose(H, fx[i], fx[j]), invert(H, fxy));
            if (left.insert(dl).second)
                report.left_witnesses.emplace(dl, std::make_pair(elems[i], elems[j]));
            if (right.insert(dr).second)
                report.right_witnesses.emplace(dr, std::make_pair(elems[i], elems[j]));
        }
    }
    report.left_defect.assign(left.begin(), left.end());
    report.right_defect.assign(right.begin(), right.end());

    int C = 0;
    for (const GroupElement& z : report.left_defect) {
        C = std::max(C, codomain_metric.norm(z, budget));
        C = std::max(C, codomain_metric.norm(invert(H, z), budget));
    }
    report.C = C;
    return report;
}

DefectMembershipReport check_defect_membership(const Quasimorphism& f,
                                               const std::vector<GroupElement>& D, const Ball& window,
                                               const Budget& budget) {
    if (D.empty()) bad("defect membership needs a nonempty D");
    const GroupDescriptor& G = f.domain();
    const GroupDescriptor& H = f.codomain();
    std::set<GroupElement, ElementLess> dset;
    for (const GroupElement& d : D) dset.insert(normalize(H, d));

    DefectMembershipReport report;
    report.pass = true;
    const std::vector<GroupElement> elems = window.elements();
    std::vector<GroupElement> fx;
    fx.reserve(elems.size());
    for (const GroupElement& x : elems) fx.push_back(f.eval(x));

    long long pairs = 0;
    for (std::size_t i = 0; i < elems.size(); ++i) {
        for (std::size_t j = 0; j < elems.size(); ++j) {
            charge_pairs(budget, ++pairs, "defect membership scan");
            ++report.pair_count;
            GroupElement fxy = f.eval(compose(G, elems[i], elems[j]));
            // f(xy) in f(x) f(y) D
            GroupElement lhs1 = compose(H, invert(H, compose(H, fx[i], fx[j])), fxy);
            // f(y)^-1 f(x)^-1 in D f(xy)^-1
            GroupElement lhs2 =
                compose(H, compose(H, invert(H, fx[j]), invert(H, fx[i])), fxy);
            bool m1 = dset.count(lhs1) > 0;
            bool m2 = dset.count(lhs2) > 0;
            if (m1 != m2) throw std::logic_error("defect membership routes disagree");
            if (!m1) {
                report.pass = false;
                report.failures.emplace_back(elems[i], elems[j], lhs1);
            }
        }
    }
    return report;
}

BoundedDistanceResult bounded_distance_check(const Quasimorphism& f, const Ball& window,
                                             const ProperMetric& codomain_metric,
                                             const Budget& budget) {
    const GroupDescriptor& G = f.domain();
    const GroupDescriptor& H = f.codomain();
    const std::vector<GroupElement> elems = window.elements();
    std::vector<GroupElement> fx;
    fx.reserve(elems.size());
    for (const GroupElement& x : elems) fx.push_back(f.eval(x));

    BoundedDistanceResult result;
    long long pairs = 0;
    for (std::size_t i = 0; i < elems.size(); ++i) {
        for (std::size_t j = 0; j < elems.size(); ++j) {
            charge_pairs(budget, ++pairs, "bounded distance scan");
            GroupElement fxy = f.eval(compose(G, elems[i], elems[j]));
            GroupElement defect =
                compose(H, compose(H, invert(H, fx[j]), invert(H, fx[i])), fxy);
            result.C_obs = std::max(result.C_obs, codomain_metric.norm(defect, budget));
            result.max_pair_distance = std::max(
                result.max_pair_distance,
                codomain_metric.distance(fxy, compose(H, fx[i], fx[j]), budget));
        }
    }
    return result;
}

StabilizationDiagnostic defect_stabilization(const Quasimorphism& f, const ProperMetric& domain_metric,
                                             const ProperMetric& codomain_metric, int radius,
                                             const Budget& budget) {
    if (radius < 0) bad("stabilization radius must be nonnegative");
    StabilizationDiagnostic diag;
    const GroupDescriptor& G = f.domain();
    for (int r = radius; r < radius + 3; ++r)
        diag.reports.push_back(
            defect_observed(f, domain_metric.ball(identity(G), r, budget), codomain_metric, budget));
    diag.left_stable = diag.reports[0].left_defect == diag.reports[1].left_defect &&
                       diag.reports[1].left_defect == diag.reports[2].left_defect;
    diag.right_stable = diag.reports[0].right_defect == diag.reports[1].right_defect &&
                        diag.reports[1].right_defect == diag.reports[2].right_defect;
    return diag;
}

}  // namespace cforge
