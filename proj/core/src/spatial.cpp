#include "scenesmith/spatial.hpp"

#include <algorithm>
#include <cmath>

#include "scenesmith/rng.hpp"

namespace scenesmith {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double yaw) {
    double w = std::fmod(yaw, 2.0 * kPi);
    if (w < 0) w += 2.0 * kPi;
    return w;
}
}  // namespace

double ParamVector::get(int statement_index, const std::string& key, double fallback) const {
    for (const ParamEntry& e : entries)
        if (e.statement_index == statement_index && e.key == key) return e.value;
    return fallback;
}

void ParamVector::set(int statement_index, const std::string& key, double value) {
    for (ParamEntry& e : entries) {
        if (e.statement_index == statement_index && e.key == key) {
            e.value = value;
            return;
        }
    }
    entries.push_back({statement_index, key, value, ParamKind::Distance});
}

ParamVector build_params(const PredicateProgram& program, uint64_t seed) {
    ParamVector params;
    Rng rng = Rng(seed).fork(0x726f74);  // RANDOM-ROT draw stream
    for (const Statement& st : program.statements) {
        switch (st.relation) {
            case Relation::LeftOf:
            case Relation::RightOf:
            case Relation::FrontOf:
            case Relation::BackOf:
                params.entries.push_back(
                    {st.entry_index, "distance", st.param_number("distance", 0.0), ParamKind::Distance});
                break;
            case Relation::PlaceOnBase:
                if (st.params.contains("x") && st.params.at("x").is_number())
                    params.entries.push_back(
                        {st.entry_index, "x", st.param_number("x", 0.0), ParamKind::Coordinate});
                if (st.params.contains("y") && st.params.at("y").is_number())
                    params.entries.push_back(
                        {st.entry_index, "y", st.param_number("y", 0.0), ParamKind::Coordinate});
                break;
            case Relation::RandomRot:
                params.entries.push_back(
                    {st.entry_index, "yaw", rng.uniform(0.0, 2.0 * kPi), ParamKind::Angle});
                break;
            default: break;
        }
    }
    return params;
}

const AssetRecord* AssetBinding::find(const std::string& id) const {
    const auto it = by_id.find(id);
    return it == by_id.end() ? nullptr : it->second;
}

AssetBinding bind_assets(const PredicateProgram& program, const AssetCatalog& catalog, double threshold,
                         std::vector<std::string>* misses) {
    AssetBinding binding;
    for (const Description& d : program.descriptions) {
        const RetrievalResult r = retrieve(catalog, d.text, threshold);
        if (r.asset)
            binding.by_id[d.id] = r.asset;
        else if (misses)
            misses->push_back(d.id);
    }
    // Copied-group members reuse the source member's asset.
    std::map<std::string, std::vector<std::string>> groups;
    for (const Statement& st : program.statements) {
        if (st.relation == Relation::Group) {
            groups[st.subject] = st.member_list;
        } else if (st.relation == Relation::CopyGroup) {
            std::vector<std::string> copies;
            for (const std::string& m : groups[st.reference]) {
                const std::string id = copied_member_id(m, st.subject);
                if (const AssetRecord* a = binding.find(m)) binding.by_id[id] = a;
                copies.push_back(id);
            }
            groups[st.subject] = copies;
        }
    }
    return binding;
}

namespace {

struct EvalObject {
    std::string id;
    const AssetRecord* asset = nullptr;
    double x = 0, y = 0, z = 0, yaw = 0;
    bool has_x = false, has_y = false, has_z = false;
    bool physical = false;
};

// Axis-aligned box of an entity (object footprint, group union, or root) in
// world space, plus the yaw a FACING relation would copy.
struct BoxView {
    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    double top_z = 0;
    double yaw = 0;
    double center_x() const { return (min_x + max_x) * 0.5; }
    double center_y() const { return (min_y + max_y) * 0.5; }
};

struct GroupEval {
    std::vector<std::string> members;
    std::string anchor;
};

class Evaluator {
  public:
    Evaluator(const PredicateProgram& program, const ParamVector& params, const AssetBinding& binding,
              const Bounds2D& bounds, uint64_t seed)
        : program_(program), params_(params), binding_(binding), bounds_(bounds), seed_(seed) {}

    EvaluatedLayout run();

  private:
    const PredicateProgram& program_;
    const ParamVector& params_;
    const AssetBinding& binding_;
    const Bounds2D& bounds_;
    uint64_t seed_;

    std::vector<EvalObject> objects_;
    std::map<std::string, size_t> index_;
    std::map<std::string, GroupEval> groups_;

    EvalObject& ensure_object(const std::string& id) {
        const auto it = index_.find(id);
        if (it != index_.end()) return objects_[it->second];
        const AssetRecord* asset = binding_.find(id);
        if (!asset) throw CatalogError("object '" + id + "' has no retrievable asset");
        index_[id] = objects_.size();
        objects_.push_back({id, asset});
        return objects_.back();
    }
    EvalObject& object(const std::string& id) {
        const auto it = index_.find(id);
        if (it == index_.end()) throw UnsolvedObject(id, "object '" + id + "' used before introduction");
        return objects_[it->second];
    }

    Aabb2 local_box(const EvalObject& o) const { return o.asset->footprint_local(o.yaw).aabb(); }

    double require_x(const EvalObject& o) const {
        if (!o.has_x) throw UnsolvedObject(o.id, "x of '" + o.id + "' read before being determined");
        return o.x;
    }
    double require_y(const EvalObject& o) const {
        if (!o.has_y) throw UnsolvedObject(o.id, "y of '" + o.id + "' read before being determined");
        return o.y;
    }

    double object_top(const EvalObject& o) const {
        const double z = o.has_z ? o.z : bounds_.top_z - o.asset->local_aabb().min.z;
        return z + o.asset->local_aabb().max.z;
    }

    bool is_group(const std::string& id) const { return groups_.count(id) != 0; }

    BoxView view(const std::string& id) {
        if (id == "root")
            return {bounds_.min_x, bounds_.max_x, bounds_.min_y, bounds_.max_y, bounds_.top_z, 0.0};
        if (is_group(id)) return group_view(groups_.at(id));
        const EvalObject& o = object(id);
        const Aabb2 lb = local_box(o);
        return {require_x(o) + lb.min_x, o.x + lb.max_x, require_y(o) + lb.min_y, o.y + lb.max_y,
                object_top(o), o.yaw};
    }

    BoxView group_view(const GroupEval& g) {
        BoxView v;
        bool first = true;
        for (const std::string& m : g.members) {
            const BoxView mv = view(m);
            if (first) {
                v = mv;
                first = false;
            } else {
                v.min_x = std::min(v.min_x, mv.min_x);
                v.max_x = std::max(v.max_x, mv.max_x);
                v.min_y = std::min(v.min_y, mv.min_y);
                v.max_y = std::max(v.max_y, mv.max_y);
                v.top_z = std::max(v.top_z, mv.top_z);
            }
        }
        // "The facing direction of the group ... the facing direction of the
        // anchor object."
        v.yaw = object(g.anchor).yaw;
        return v;
    }

    void translate_group(GroupEval& g, double dx, double dy) {
        for (const std::string& m : g.members) {
            EvalObject& o = object(m);
            o.x = require_x(o) + dx;
            o.y = require_y(o) + dy;
        }
    }

    void set_min_x(const std::string& id, double v) {
        if (is_group(id)) {
            GroupEval& g = groups_.at(id);
            translate_group(g, v - group_view(g).min_x, 0.0);
            return;
        }
        EvalObject& o = object(id);
        o.x = v - local_box(o).min_x;
        o.has_x = true;
    }
    void set_max_x(const std::string& id, double v) {
        if (is_group(id)) {
            GroupEval& g = groups_.at(id);
            translate_group(g, v - group_view(g).max_x, 0.0);
            return;
        }
        EvalObject& o = object(id);
        o.x = v - local_box(o).max_x;
        o.has_x = true;
    }
    void set_min_y(const std::string& id, double v) {
        if (is_group(id)) {
            GroupEval& g = groups_.at(id);
            translate_group(g, 0.0, v - group_view(g).min_y);
            return;
        }
        EvalObject& o = object(id);
        o.y = v - local_box(o).min_y;
        o.has_y = true;
    }
    void set_max_y(const std::string& id, double v) {
        if (is_group(id)) {
            GroupEval& g = groups_.at(id);
            translate_group(g, 0.0, v - group_view(g).max_y);
            return;
        }
        EvalObject& o = object(id);
        o.y = v - local_box(o).max_y;
        o.has_y = true;
    }
    void set_center_x(const std::string& id, double v) {
        if (is_group(id)) {
            GroupEval& g = groups_.at(id);
            translate_group(g, v - group_view(g).center_x(), 0.0);
            return;
        }
        EvalObject& o = object(id);
        const Aabb2 lb = local_box(o);
        o.x = v - (lb.min_x + lb.max_x) * 0.5;
        o.has_x = true;
    }
    void set_center_y(const std::string& id, double v) {
        if (is_group(id)) {
            GroupEval& g = groups_.at(id);
            translate_group(g, 0.0, v - group_view(g).center_y());
            return;
        }
        EvalObject& o = object(id);
        const Aabb2 lb = local_box(o);
        o.y = v - (lb.min_y + lb.max_y) * 0.5;
        o.has_y = true;
    }

    void set_yaw(const std::string& id, double v) {
        if (is_group(id)) {
            GroupEval& g = groups_.at(id);
            EvalObject& anchor = object(g.anchor);
            const double delta = v - anchor.yaw;
            // Rigid rotation of the whole group about the anchor's footprint
            // center.
            const Aabb2 ab = local_box(anchor);
            const Vec2 pivot{require_x(anchor) + (ab.min_x + ab.max_x) * 0.5,
                             require_y(anchor) + (ab.min_y + ab.max_y) * 0.5};
            for (const std::string& m : g.members) {
                EvalObject& o = object(m);
                const Vec2 p = rotate({require_x(o) - pivot.x, require_y(o) - pivot.y}, delta);
                o.x = pivot.x + p.x;
                o.y = pivot.y + p.y;
                o.yaw += delta;
            }
            return;
        }
        object(id).yaw = v;
    }

    double current_yaw(const std::string& id) {
        if (is_group(id)) return object(groups_.at(id).anchor).yaw;
        return object(id).yaw;
    }

    void apply_statement(const Statement& st);
    void finalize(EvaluatedLayout& out);
};

double overlap_1d(double a_min, double a_max, double b_min, double b_max) {
    return std::max(0.0, std::min(a_max, b_max) - std::max(a_min, b_min));
}

void Evaluator::apply_statement(const Statement& st) {
    if (st.relation == Relation::Unknown) return;  // grammar reports it; nothing to evaluate
    const int idx = st.entry_index;

    if (st.subject_is_batch) return;  // materialized by the physical solver
    const std::string& subj = st.subject;
    if (subj == "root") return;

    switch (st.relation) {
        case Relation::Group: {
            GroupEval g;
            g.members = st.member_list;
            g.anchor = st.params.value("anchor", st.member_list.empty() ? "" : st.member_list.front());
            groups_[subj] = std::move(g);
            return;
        }
        case Relation::CopyGroup: {
            const auto src = groups_.find(st.reference);
            if (src == groups_.end())
                throw UnsolvedObject(st.reference, "group '" + st.reference + "' copied before definition");
            GroupEval g;
            for (const std::string& m : src->second.members) {
                const EvalObject source = object(m);  // by value: ensure_object may reallocate
                const std::string copy_id = copied_member_id(m, subj);
                EvalObject& copy = ensure_object(copy_id);
                copy = source;
                copy.id = copy_id;
                g.members.push_back(copy_id);
            }
            g.anchor = copied_member_id(src->second.anchor, subj);
            groups_[subj] = std::move(g);
            return;
        }
        default: break;
    }

    if (!is_group(subj)) ensure_object(subj);

    switch (st.relation) {
        case Relation::LeftOf:
            set_min_y(subj, view(st.reference).max_y + params_.get(idx, "distance", 0.0));
            break;
        case Relation::RightOf:
            set_max_y(subj, view(st.reference).min_y - params_.get(idx, "distance", 0.0));
            break;
        case Relation::FrontOf:
            set_min_x(subj, view(st.reference).max_x + params_.get(idx, "distance", 0.0));
            break;
        case Relation::BackOf:
            set_max_x(subj, view(st.reference).min_x - params_.get(idx, "distance", 0.0));
            break;
        case Relation::AlignCenterLR: set_center_y(subj, view(st.reference).center_y()); break;
        case Relation::AlignCenterFB: set_center_x(subj, view(st.reference).center_x()); break;
        case Relation::AlignLeft: set_max_y(subj, view(st.reference).max_y); break;
        case Relation::AlignRight: set_min_y(subj, view(st.reference).min_y); break;
        case Relation::AlignFront: set_max_x(subj, view(st.reference).max_x); break;
        case Relation::AlignBack: set_min_x(subj, view(st.reference).min_x); break;
        case Relation::SymmetryAlong: {
            const BoxView b = view(st.reference);
            const BoxView c = view(st.params.value("C", "root"));
            set_center_x(subj, 2.0 * c.center_x() - b.center_x());
            set_center_y(subj, 2.0 * c.center_y() - b.center_y());
            break;
        }
        case Relation::FacingTo: {
            const BoxView a = view(subj);
            const BoxView b = view(st.reference);
            set_yaw(subj, std::atan2(b.center_y() - a.center_y(), b.center_x() - a.center_x()));
            break;
        }
        case Relation::FacingSameAs: set_yaw(subj, view(st.reference).yaw); break;
        case Relation::FacingOppositeTo: set_yaw(subj, view(st.reference).yaw + kPi); break;
        case Relation::FacingFront: set_yaw(subj, 0.0); break;
        case Relation::FacingBack: set_yaw(subj, kPi); break;
        case Relation::FacingLeft: set_yaw(subj, kPi / 2.0); break;
        case Relation::FacingRight: set_yaw(subj, -kPi / 2.0); break;
        case Relation::RandomRot: set_yaw(subj, params_.get(idx, "yaw", 0.0)); break;
        case Relation::OrientByRelativeSide: {
            // Two-candidate rule: keep default_yaw unless the quarter turn
            // strictly improves the summed axis overlaps with B.
            const double default_yaw = current_yaw(subj);
            const BoxView b = view(st.reference);
            set_yaw(subj, default_yaw);
            const BoxView a1 = view(subj);
            const double scale1 = overlap_1d(a1.min_x, a1.max_x, b.min_x, b.max_x) +
                                  overlap_1d(a1.min_y, a1.max_y, b.min_y, b.max_y);
            set_yaw(subj, default_yaw + kPi / 2.0);
            const BoxView a2 = view(subj);
            const double scale2 = overlap_1d(a2.min_x, a2.max_x, b.min_x, b.max_x) +
                                  overlap_1d(a2.min_y, a2.max_y, b.min_y, b.max_y);
            set_yaw(subj, scale1 > scale2 ? default_yaw : default_yaw + kPi / 2.0);
            break;
        }
        case Relation::PlaceOnBase: {
            if (st.params.contains("x")) set_center_x(subj, params_.get(idx, "x", 0.0));
            if (st.params.contains("y")) set_center_y(subj, params_.get(idx, "y", 0.0));
            if (!is_group(subj)) {
                EvalObject& o = object(subj);
                o.z = bounds_.top_z - o.asset->local_aabb().min.z;
                o.has_z = true;
            }
            break;
        }
        case Relation::PlaceOn: {
            // Initializer only: A centered on B plus the requested offsets,
            // base on B's top.  The physical solver owns the final pose.
            EvalObject& o = object(subj);
            const BoxView b = view(st.reference);
            set_center_x(subj, b.center_x() + st.param_number("x_offset", 0.0));
            set_center_y(subj, b.center_y() + st.param_number("y_offset", 0.0));
            o.z = b.top_z - o.asset->local_aabb().min.z;
            o.has_z = true;
            o.physical = true;
            break;
        }
        case Relation::PlaceIn: {
            EvalObject& o = object(subj);
            const BoxView b = view(st.reference);
            o.x = b.center_x();
            o.y = b.center_y();
            o.z = b.top_z - o.asset->local_aabb().min.z;
            o.has_x = o.has_y = o.has_z = true;
            o.physical = true;
            break;
        }
        case Relation::PlaceAnywhere: {
            EvalObject& o = object(subj);
            o.x = (bounds_.min_x + bounds_.max_x) * 0.5;
            o.y = (bounds_.min_y + bounds_.max_y) * 0.5;
            o.z = bounds_.top_z - o.asset->local_aabb().min.z;
            o.has_x = o.has_y = o.has_z = true;
            o.physical = true;
            break;
        }
        default: break;
    }
}

void Evaluator::finalize(EvaluatedLayout& out) {
    for (const EvalObject& o : objects_) {
        if (!o.physical && (!o.has_x || !o.has_y))
            throw UnsolvedObject(o.id, "object '" + o.id + "' ends evaluation without a determined " +
                                           (o.has_x ? "y" : "x"));
        Pose pose;
        pose.position = {o.x, o.y, o.has_z ? o.z : bounds_.top_z - o.asset->local_aabb().min.z};
        pose.yaw = wrap_angle(o.yaw);
        out.poses[o.id] = pose;
        (o.physical ? out.physical_order : out.spatial_order).push_back(o.id);
    }
}

EvaluatedLayout Evaluator::run() {
    size_t di = 0, si = 0;
    while (di < program_.descriptions.size() || si < program_.statements.size()) {
        const bool take_desc =
            si >= program_.statements.size() ||
            (di < program_.descriptions.size() &&
             program_.descriptions[di].entry_index < program_.statements[si].entry_index);
        if (take_desc) {
            if (program_.descriptions[di].id != "root") ensure_object(program_.descriptions[di].id);
            ++di;
        } else {
            apply_statement(program_.statements[si]);
            ++si;
        }
    }
    EvaluatedLayout out;
    finalize(out);
    return out;
}

}  // namespace

EvaluatedLayout apply_predicates(const PredicateProgram& program, const ParamVector& params,
                                 const AssetBinding& binding, const Bounds2D& bounds, uint64_t seed) {
    return Evaluator(program, params, binding, bounds, seed).run();
}

double layout_penalty(const std::map<std::string, Pose>& poses, const std::vector<std::string>& ids,
                      const AssetBinding& binding, const Bounds2D& bounds) {
    std::vector<Footprint> fps;
    fps.reserve(ids.size());
    for (const std::string& id : ids) fps.push_back(binding.find(id)->footprint_world(poses.at(id)));
    double total = 0.0;
    for (size_t i = 0; i < fps.size(); ++i) {
        for (size_t j = i + 1; j < fps.size(); ++j) total += overlap_area(fps[i], fps[j]);
        total += boundary_violation(fps[i], bounds.rect());
    }
    return total;
}

SpatialResult optimize(const PredicateProgram& program, const AssetCatalog& catalog, const Bounds2D& bounds,
                       uint64_t seed, const SolveConfig& config, StepObserver* observer) {
    std::vector<std::string> misses;
    AssetBinding binding = bind_assets(program, catalog, config.retrieval_threshold, &misses);
    if (!misses.empty()) {
        std::string joined;
        for (const std::string& m : misses) joined += (joined.empty() ? "" : ", ") + m;
        throw CatalogError("no catalog match for: " + joined);
    }

    ParamVector params = build_params(program, seed);
    auto evaluate = [&](const ParamVector& p) {
        EvaluatedLayout layout = apply_predicates(program, p, binding, bounds, seed);
        const double pen = layout_penalty(layout.poses, layout.spatial_order, binding, bounds);
        return std::pair<EvaluatedLayout, double>{std::move(layout), pen};
    };

    auto [layout, pen] = evaluate(params);
    const double h_lin = bounds.shortest_dimension() / 10.0;
    const double h_ang = 10.0 * kPi / 180.0;
    Rng rng = Rng(seed).fork(0x6465736365ULL);  // candidate draw stream

    for (int iter = 0; iter < kDescentIterations && pen >= config.epsilon; ++iter) {
        for (size_t pi = 0; pi < params.entries.size() && pen >= config.epsilon; ++pi) {
            ParamEntry& entry = params.entries[pi];
            const double half = entry.kind == ParamKind::Angle ? h_ang : h_lin;
            const double current = entry.value;
            double best_value = current;
            double best_pen = pen;
            EvaluatedLayout best_layout = layout;
            for (int c = 0; c < kDescentCandidates; ++c) {
                entry.value = rng.uniform(current - half, current + half);
                auto [cand_layout, cand_pen] = evaluate(params);
                if (cand_pen < best_pen) {
                    best_pen = cand_pen;
                    best_value = entry.value;
                    best_layout = std::move(cand_layout);
                }
            }
            entry.value = best_value;
            pen = best_pen;
            layout = std::move(best_layout);
            if (observer) observer->on_step(iter, static_cast<int>(pi), pen);
        }
    }

    if (pen < config.epsilon) return SolvedLayout{std::move(layout), std::move(params), pen};

    SolverFailure failure;
    failure.penalty = pen;
    std::vector<Footprint> fps;
    for (const std::string& id : layout.spatial_order)
        fps.push_back(binding.find(id)->footprint_world(layout.poses.at(id)));
    for (size_t i = 0; i < fps.size(); ++i) {
        for (size_t j = i + 1; j < fps.size(); ++j) {
            const double ov = overlap_area(fps[i], fps[j]);
            if (ov > 1e-9)
                failure.violations.push_back({Violation::Kind::Overlap, layout.spatial_order[i],
                                              layout.spatial_order[j], ov});
        }
        const double out = boundary_violation(fps[i], bounds.rect());
        if (out > 1e-9)
            failure.violations.push_back({Violation::Kind::OutOfBounds, layout.spatial_order[i], "", out});
    }
    failure.best_layout = std::move(layout);
    failure.params = std::move(params);
    return failure;
}

}  // namespace scenesmith
