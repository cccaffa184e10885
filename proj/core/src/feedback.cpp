#include "scenesmith/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

namespace scenesmith {

namespace {

namespace bg = boost::geometry;
using BoostPoint = bg::model::d2::point_xy<double>;
using BoostPolygon = bg::model::polygon<BoostPoint>;
using BoostMulti = bg::model::multi_polygon<BoostPolygon>;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string quoted(const std::string& id) { return "'" + id + "'"; }

const char* direction_phrase(const std::string& direction) {
    if (direction == "front") return "in front of";
    if (direction == "back") return "behind";
    if (direction == "left") return "left of";
    return "right of";
}

void sort_issues(std::vector<FeedbackIssue>& issues) {
    std::stable_sort(issues.begin(), issues.end(), [](const FeedbackIssue& a, const FeedbackIssue& b) {
        if (a.statement_index != b.statement_index) return a.statement_index < b.statement_index;
        if (a.subject != b.subject) return a.subject < b.subject;
        return a.other < b.other;
    });
}

Footprint cell_footprint(double x0, double y0, double res) {
    return Footprint{{{x0, y0}, {x0 + res, y0}, {x0 + res, y0 + res}, {x0, y0 + res}}};
}

}  // namespace

const char* feedback_channel_name(FeedbackChannel channel) {
    switch (channel) {
        case FeedbackChannel::Grammar: return "grammar";
        case FeedbackChannel::Failure: return "failure";
        case FeedbackChannel::Success: return "success";
    }
    return "success";
}

std::vector<std::pair<std::string, Footprint>> scene_footprints(const SceneState& scene) {
    std::vector<std::pair<std::string, Footprint>> out;
    out.reserve(scene.objects.size());
    for (const PlacedObject& o : scene.objects) out.emplace_back(o.id, o.footprint());
    return out;
}

std::vector<std::pair<std::string, Footprint>> layout_footprints(const EvaluatedLayout& layout,
                                                                 const AssetBinding& binding) {
    std::vector<std::pair<std::string, Footprint>> out;
    for (const auto& [id, pose] : layout.poses)
        if (const AssetRecord* asset = binding.find(id)) out.emplace_back(id, asset->footprint_world(pose));
    return out;
}

std::vector<EmptyRegion> detect_empty_regions(const std::vector<std::pair<std::string, Footprint>>& placed,
                                              const Bounds2D& bounds, double resolution, double min_area) {
    const double res = resolution;
    const int nx = std::max(1, static_cast<int>(std::ceil(bounds.width_x() / res - 1e-9)));
    const int ny = std::max(1, static_cast<int>(std::ceil(bounds.width_y() / res - 1e-9)));
    std::vector<uint8_t> blocked(static_cast<size_t>(nx) * ny, 0);
    const auto cell = [&](int i, int j) -> uint8_t& { return blocked[static_cast<size_t>(i) * ny + j]; };

    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& [id, fp] : placed) {
        if (fp.empty()) continue;
        smallest = std::min(smallest, fp.area());
        const Aabb2 box = fp.aabb();
        const int i0 = std::max(0, static_cast<int>(std::floor((box.min_x - bounds.min_x) / res)));
        const int i1 = std::min(nx - 1, static_cast<int>(std::floor((box.max_x - bounds.min_x) / res)));
        const int j0 = std::max(0, static_cast<int>(std::floor((box.min_y - bounds.min_y) / res)));
        const int j1 = std::min(ny - 1, static_cast<int>(std::floor((box.max_y - bounds.min_y) / res)));
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j) {
                if (cell(i, j)) continue;
                const Footprint cfp =
                    cell_footprint(bounds.min_x + i * res, bounds.min_y + j * res, res);
                if (overlap_area(fp, cfp) > 1e-12) cell(i, j) = 1;
            }
    }
    if (min_area < 0.0) min_area = std::isfinite(smallest) ? 4.0 * smallest : 0.0;

    // Blocked-count prefix per row for O(1) downward-extension checks.
    std::vector<int> prefix(static_cast<size_t>(nx) * (ny + 1), 0);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            prefix[static_cast<size_t>(i) * (ny + 1) + j + 1] =
                prefix[static_cast<size_t>(i) * (ny + 1) + j] + (cell(i, j) ? 1 : 0);
    const auto row_blocked = [&](int i, int j0, int j1) {
        return prefix[static_cast<size_t>(i) * (ny + 1) + j1 + 1] -
               prefix[static_cast<size_t>(i) * (ny + 1) + j0] > 0;
    };

    // Histogram sweep along +x: rectangles pop out height-tight and
    // width-maximal; keeping only those that cannot extend one more row
    // leaves exactly the maximal set, each found once.
    struct Rect {
        int i0, i1, j0, j1;
        double area;
    };
    std::vector<Rect> rects;
    std::vector<int> up(ny, 0);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) up[j] = cell(i, j) ? 0 : up[j] + 1;
        std::vector<std::pair<int, int>> stack;  // (height, leftmost j)
        for (int j = 0; j <= ny; ++j) {
            const int h = j < ny ? up[j] : 0;
            int left = j;
            while (!stack.empty() && stack.back().first > h) {
                const auto [height, l] = stack.back();
                stack.pop_back();
                left = l;
                if (i + 1 < nx && !row_blocked(i + 1, l, j - 1)) continue;
                const double area = (height * res) * ((j - l) * res);
                if (area + 1e-12 >= min_area) rects.push_back({i - height + 1, i, l, j - 1, area});
            }
            if (h > 0 && (stack.empty() || stack.back().first < h)) stack.emplace_back(h, left);
        }
    }

    std::stable_sort(rects.begin(), rects.end(), [](const Rect& a, const Rect& b) {
        if (a.area != b.area) return a.area > b.area;
        if (a.i0 != b.i0) return a.i0 < b.i0;
        return a.j0 < b.j0;
    });

    std::vector<EmptyRegion> out;
    std::vector<Rect> kept;
    for (const Rect& r : rects) {
        bool overlaps = false;
        for (const Rect& k : kept) {
            if (r.i0 <= k.i1 && k.i0 <= r.i1 && r.j0 <= k.j1 && k.j0 <= r.j1) {
                overlaps = true;
                break;
            }
        }
        if (overlaps) continue;
        kept.push_back(r);

        EmptyRegion region;
        region.rect = {bounds.min_x + r.i0 * res, bounds.min_x + (r.i1 + 1) * res,
                       bounds.min_y + r.j0 * res, bounds.min_y + (r.j1 + 1) * res};
        region.area = r.area;
        const Vec2 center = region.rect.center();
        double best = std::numeric_limits<double>::infinity();
        const Footprint* best_fp = nullptr;
        for (const auto& [id, fp] : placed) {
            if (fp.empty()) continue;
            const double d = distance_to_convex(fp.hull, center);
            if (d < best || (d == best && !region.nearest_object.empty() && id < region.nearest_object)) {
                best = d;
                region.nearest_object = id;
                best_fp = &fp;
            }
        }
        if (best_fp) {
            const Vec2 delta = center - best_fp->centroid();
            if (std::abs(delta.x) >= std::abs(delta.y))
                region.direction = delta.x >= 0 ? "front" : "back";
            else
                region.direction = delta.y >= 0 ? "left" : "right";
        }
        out.push_back(std::move(region));
    }
    return out;
}

std::vector<EmptyRegion> detect_empty_regions(const SceneState& scene, double resolution, double min_area) {
    return detect_empty_regions(scene_footprints(scene), scene.bounds, resolution, min_area);
}

double footprint_union_area(const std::vector<Footprint>& footprints) {
    BoostMulti acc;
    for (const Footprint& fp : footprints) {
        if (fp.hull.size() < 3) continue;
        BoostPolygon poly;
        for (const Vec2& v : fp.hull) bg::append(poly.outer(), BoostPoint(v.x, v.y));
        bg::correct(poly);
        BoostMulti merged;
        bg::union_(acc, poly, merged);
        acc = std::move(merged);
    }
    return bg::area(acc);
}

SceneMetrics scene_metrics(const SceneState& scene) {
    SceneMetrics m;
    m.object_count = static_cast<int>(scene.objects.size());
    if (scene.objects.empty()) return m;

    std::vector<Footprint> fps;
    std::vector<Vec2> all_points;
    for (const PlacedObject& o : scene.objects) {
        fps.push_back(o.footprint());
        all_points.insert(all_points.end(), fps.back().hull.begin(), fps.back().hull.end());
    }
    const double u = footprint_union_area(fps);
    const double table = scene.bounds.width_x() * scene.bounds.width_y();
    m.surface_coverage = table > 0 ? std::min(1.0, u / table) : 0.0;
    try {
        const double hull_area = convex_hull_2d(all_points).area();
        m.compactness = hull_area > 0 ? std::min(1.0, u / hull_area) : 1.0;
    } catch (const DegenerateInput&) {
        m.compactness = 1.0;
    }
    return m;
}

nlohmann::json FeedbackReport::to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["channel"] = feedback_channel_name(channel);
    j["issues"] = nlohmann::json::array();
    for (const FeedbackIssue& issue : issues) {
        nlohmann::json e{{"kind", issue.kind},
                         {"statement_index", issue.statement_index},
                         {"subject", issue.subject},
                         {"detail", issue.detail}};
        if (!issue.other.empty()) e["other"] = issue.other;
        if (issue.magnitude != 0.0) e["magnitude"] = issue.magnitude;
        j["issues"].push_back(std::move(e));
    }
    j["empty_regions"] = nlohmann::json::array();
    for (const EmptyRegion& r : empty_regions) {
        nlohmann::json e{{"min_x", r.rect.min_x}, {"max_x", r.rect.max_x}, {"min_y", r.rect.min_y},
                         {"max_y", r.rect.max_y}, {"area", r.area}};
        if (!r.nearest_object.empty()) {
            e["nearest_object"] = r.nearest_object;
            e["direction"] = r.direction;
        }
        j["empty_regions"].push_back(std::move(e));
    }
    if (channel == FeedbackChannel::Success) {
        j["metrics"] = {{"stability_score", metrics.stability_score},
                        {"surface_coverage", metrics.surface_coverage},
                        {"compactness", metrics.compactness},
                        {"object_count", metrics.object_count}};
        if (metrics.external_vqa) j["metrics"]["external_vqa"] = *metrics.external_vqa;
        if (!metrics.vqa_error.empty()) j["metrics"]["vqa_error"] = metrics.vqa_error;
    }
    j["text"] = text;
    return j;
}

std::string render_text(const FeedbackReport& report) {
    std::string out;
    switch (report.channel) {
        case FeedbackChannel::Grammar:
            out = "The scene description has " + std::to_string(report.issues.size()) +
                  " grammar issue(s):\n";
            break;
        case FeedbackChannel::Failure:
            out = "The layout could not be solved. " + std::to_string(report.issues.size()) +
                  " problem(s) were found:\n";
            break;
        case FeedbackChannel::Success:
            out = "The scene was generated successfully.\n";
            break;
    }
    for (const FeedbackIssue& issue : report.issues) {
        out += "- ";
        if (issue.statement_index >= 0) out += "entry " + std::to_string(issue.statement_index) + ": ";
        out += issue.detail;
        out += "\n";
    }
    if (report.channel == FeedbackChannel::Failure)
        out += "- The placed objects cover " + fmt(report.metrics.surface_coverage * 100.0) +
               "% of the surface.\n";
    if (report.channel == FeedbackChannel::Success) {
        const SceneMetrics& m = report.metrics;
        out += "- Objects placed: " + std::to_string(m.object_count) + ".\n";
        out += "- Stability score: " + fmt(m.stability_score) + ".\n";
        out += "- Surface coverage: " + fmt(m.surface_coverage) + ".\n";
        out += "- Compactness: " + fmt(m.compactness) + ".\n";
        if (m.external_vqa)
            out += "- Visual quality score: " + fmt(*m.external_vqa) + ".\n";
        else if (!m.vqa_error.empty())
            out += "- Visual quality score: unavailable (" + m.vqa_error + ").\n";
    }
    for (const EmptyRegion& r : report.empty_regions) {
        out += "- There is an empty region";
        if (!r.nearest_object.empty())
            out += " " + std::string(direction_phrase(r.direction)) + " the " + quoted(r.nearest_object);
        out += " covering " + fmt(r.area) + " m^2 (x in [" + fmt(r.rect.min_x) + ", " + fmt(r.rect.max_x) +
               "], y in [" + fmt(r.rect.min_y) + ", " + fmt(r.rect.max_y) + "]).\n";
    }
    return out;
}

FeedbackReport grammar_report(const PredicateProgram& program, std::vector<GrammarIssue> issues) {
    FeedbackReport report;
    report.channel = FeedbackChannel::Grammar;
    std::stable_sort(issues.begin(), issues.end(), [](const GrammarIssue& a, const GrammarIssue& b) {
        if (a.entry_index != b.entry_index) return a.entry_index < b.entry_index;
        return a.subject < b.subject;
    });
    for (const GrammarIssue& issue : issues) {
        FeedbackIssue fi;
        fi.kind = issue_kind_name(issue.kind);
        fi.statement_index = issue.entry_index;
        fi.subject = issue.subject;
        fi.detail = std::string(issue_kind_name(issue.kind)) +
                    (issue.subject.empty() ? "" : " for " + quoted(issue.subject)) + ": " + issue.detail;
        report.issues.push_back(std::move(fi));
    }
    (void)program;
    report.text = render_text(report);
    return report;
}

FeedbackReport failure_report(std::vector<FeedbackIssue> issues,
                              const std::vector<std::pair<std::string, Footprint>>& placed,
                              const Bounds2D& bounds, double resolution) {
    FeedbackReport report;
    report.channel = FeedbackChannel::Failure;
    sort_issues(issues);
    report.issues = std::move(issues);
    report.empty_regions = detect_empty_regions(placed, bounds, resolution);

    std::vector<Footprint> fps;
    for (const auto& [id, fp] : placed) fps.push_back(fp);
    const double table = bounds.width_x() * bounds.width_y();
    const double coverage = table > 0 ? std::min(1.0, footprint_union_area(fps) / table) : 0.0;
    report.metrics.surface_coverage = coverage;
    report.metrics.object_count = static_cast<int>(placed.size());

    report.text = render_text(report);
    return report;
}

FeedbackReport diagnose_failure(const SolverFailure& failure, const AssetBinding& binding,
                                const Bounds2D& bounds, double resolution) {
    std::vector<FeedbackIssue> issues;
    for (const Violation& v : failure.violations) {
        FeedbackIssue issue;
        issue.subject = v.a;
        issue.magnitude = v.magnitude;
        if (v.kind == Violation::Kind::Overlap) {
            issue.kind = "Penetration";
            issue.other = v.b;
            issue.detail = "Objects " + quoted(v.a) + " and " + quoted(v.b) + " overlap by " +
                           fmt(v.magnitude) + " m^2.";
        } else {
            issue.kind = "OutOfBounds";
            issue.detail = "Object " + quoted(v.a) + " extends " + fmt(v.magnitude) +
                           " m outside the supporting surface.";
        }
        issues.push_back(std::move(issue));
    }
    return failure_report(std::move(issues), layout_footprints(failure.best_layout, binding), bounds,
                          resolution);
}

FeedbackReport diagnose_failure(const PlacementError& error, const std::string& object_id,
                                int statement_index, const SceneState& scene, double resolution) {
    FeedbackIssue issue;
    issue.statement_index = statement_index;
    issue.subject = object_id;
    issue.magnitude = error.candidates_tried;
    switch (error.kind) {
        case PlacementError::Kind::PhysicsRejection:
            issue.kind = "StackInfeasible";
            issue.detail = "No feasible stacking pose was found for " + quoted(object_id) + " (" +
                           std::to_string(error.candidates_tried) + " of " +
                           std::to_string(error.candidates_total) + " candidates tried fell or slid).";
            break;
        case PlacementError::Kind::NoFeasiblePlacement:
            issue.kind = "StackInfeasible";
            issue.detail = "No collision-free supported pose exists for " + quoted(object_id) + ".";
            break;
        case PlacementError::Kind::TargetMissing:
            issue.kind = "TargetMissing";
            issue.detail = "Placement target for " + quoted(object_id) + " is not part of the scene.";
            break;
        case PlacementError::Kind::ContainerHasNoCavity:
            issue.kind = "ContainerHasNoCavity";
            issue.detail = "The container for " + quoted(object_id) + " has no open interior to fill.";
            break;
    }
    return failure_report({std::move(issue)}, scene_footprints(scene), scene.bounds, resolution);
}

FeedbackReport diagnose_failure(const PlaceInResult& partial, const std::string& container_id,
                                int statement_index, const SceneState& scene, double resolution) {
    std::vector<FeedbackIssue> issues;
    for (const std::string& id : partial.failed) {
        FeedbackIssue issue;
        issue.kind = "BatchPartiallyPlaced";
        issue.statement_index = statement_index;
        issue.subject = id;
        issue.other = container_id;
        issue.detail = "Object " + quoted(id) + " never settled inside " + quoted(container_id) +
                       " (placed " + std::to_string(partial.placed.size()) + ", failed " +
                       std::to_string(partial.failed.size()) + ").";
        issues.push_back(std::move(issue));
    }
    return failure_report(std::move(issues), scene_footprints(scene), scene.bounds, resolution);
}

FeedbackReport success_report(const SceneState& scene, SimulationBackend& backend, uint64_t seed,
                              double resolution, const PerturbationSpec* spec, VqaClient* vqa,
                              const std::string& scene_prompt) {
    FeedbackReport report;
    report.channel = FeedbackChannel::Success;
    report.metrics = scene_metrics(scene);

    if (!scene.objects.empty()) {
        double sum = 0.0;
        for (const PlacedObject& o : scene.objects) {
            const PerturbationSpec object_spec = spec ? *spec : PerturbationSpec::defaults_for(o);
            const StabilityDataset data =
                sample_dataset(scene, o.id, object_spec, backend, seed ^ fnv1a64(o.id));
            double p_fail = 0.0;
            try {
                p_fail = estimate_p_fail(PerturbationVector{}, data, object_spec).p_fail;
            } catch (const DegenerateWeights&) {
                // All weights underflowed: fall back to the unweighted rate.
                double fails = 0;
                for (const StabilitySample& s : data.samples) fails += s.label;
                p_fail = fails / static_cast<double>(data.samples.size());
            }
            sum += 1.0 - p_fail;
        }
        report.metrics.stability_score = sum / static_cast<double>(scene.objects.size());
    }

    if (vqa) {
        try {
            report.metrics.external_vqa = vqa->score(scene, scene_prompt);
        } catch (const std::exception& e) {
            report.metrics.vqa_error = e.what();
        }
    }

    report.empty_regions = detect_empty_regions(scene, resolution);
    report.text = render_text(report);
    return report;
}

}  // namespace scenesmith
