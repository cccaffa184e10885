#include "scenesmith/predicate.hpp"

#include <algorithm>
#include <set>

namespace scenesmith {

namespace {

struct RelationRow {
    Relation rel;
    const char* name;
};

constexpr RelationRow kRelationTable[] = {
    {Relation::LeftOf, "LEFT-OF"},
    {Relation::RightOf, "RIGHT-OF"},
    {Relation::FrontOf, "FRONT-OF"},
    {Relation::BackOf, "BACK-OF"},
    {Relation::AlignCenterLR, "ALIGN-CENTER-LR"},
    {Relation::AlignCenterFB, "ALIGN-CENTER-FB"},
    {Relation::AlignLeft, "ALIGN-LEFT"},
    {Relation::AlignRight, "ALIGN-RIGHT"},
    {Relation::AlignFront, "ALIGN-FRONT"},
    {Relation::AlignBack, "ALIGN-BACK"},
    {Relation::SymmetryAlong, "SYMMETRY-ALONG"},
    {Relation::FacingTo, "FACING-TO"},
    {Relation::FacingSameAs, "FACING-SAME-AS"},
    {Relation::FacingOppositeTo, "FACING-OPPOSITE-TO"},
    {Relation::FacingFront, "FACING-FRONT"},
    {Relation::FacingBack, "FACING-BACK"},
    {Relation::FacingLeft, "FACING-LEFT"},
    {Relation::FacingRight, "FACING-RIGHT"},
    {Relation::RandomRot, "RANDOM-ROT"},
    {Relation::OrientByRelativeSide, "ORIENT-BY-RELATIVE-SIDE"},
    {Relation::PlaceOnBase, "PLACE-ON-BASE"},
    {Relation::PlaceOn, "PLACE-ON"},
    {Relation::Group, "GROUP"},
    {Relation::CopyGroup, "COPY-GROUP"},
    {Relation::PlaceIn, "PLACE-IN"},
    {Relation::PlaceAnywhere, "PLACE-ANYWHERE"},
};

static_assert(std::size(kRelationTable) == kRelationCount);

}  // namespace

const char* relation_name(Relation r) {
    for (const RelationRow& row : kRelationTable)
        if (row.rel == r) return row.name;
    return "UNKNOWN";
}

Relation relation_from_name(const std::string& name) {
    for (const RelationRow& row : kRelationTable)
        if (name == row.name) return row.rel;
    if (name == "SIDE-SCALE-ALIGN") return Relation::OrientByRelativeSide;
    return Relation::Unknown;
}

const char* issue_kind_name(IssueKind kind) {
    switch (kind) {
        case IssueKind::UnknownRelation: return "UnknownRelation";
        case IssueKind::ForwardReference: return "ForwardReference";
        case IssueKind::MissingDescription: return "MissingDescription";
        case IssueKind::DuplicateDescription: return "DuplicateDescription";
        case IssueKind::SubjectIsRoot: return "SubjectIsRoot";
        case IssueKind::PlaceOnRoot: return "PlaceOnRoot";
        case IssueKind::MissingParam: return "MissingParam";
        case IssueKind::InvalidParamValue: return "InvalidParamValue";
        case IssueKind::UnknownParam: return "UnknownParam";
        case IssueKind::GroupNameInvalid: return "GroupNameInvalid";
        case IssueKind::GroupDuplicate: return "GroupDuplicate";
        case IssueKind::GroupUnknown: return "GroupUnknown";
        case IssueKind::GroupMemberUnknown: return "GroupMemberUnknown";
        case IssueKind::GroupAnchorInvalid: return "GroupAnchorInvalid";
        case IssueKind::BatchNotAllowed: return "BatchNotAllowed";
        case IssueKind::SpecialNotAlone: return "SpecialNotAlone";
        case IssueKind::OrderingViolation: return "OrderingViolation";
        case IssueKind::RetrievalMiss: return "RetrievalMiss";
        case IssueKind::NotFullySolved: return "NotFullySolved";
    }
    return "Unknown";
}

double Statement::param_number(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    if (it == params.end() || !it->is_number()) return fallback;
    return it->get<double>();
}

const Description* PredicateProgram::description_for(const std::string& id) const {
    for (const Description& d : descriptions)
        if (d.id == id) return &d;
    return nullptr;
}

std::string copied_member_id(const std::string& member, const std::string& new_group) {
    return member + "-" + new_group;
}

namespace {

std::string strip_code_fences(const std::string& text) {
    const size_t fence = text.find("```");
    if (fence == std::string::npos) return text;
    // Drop the opening fence line (``` or ```json) and everything after the
    // closing fence.
    size_t body = text.find('\n', fence);
    if (body == std::string::npos) return text;
    ++body;
    const size_t close = text.find("```", body);
    return text.substr(body, close == std::string::npos ? std::string::npos : close - body);
}

}  // namespace

PredicateProgram parse_program(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(strip_code_fences(text));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), -1);
    }
    if (!root.is_array()) throw ParseError("program must be a JSON array", -1);

    PredicateProgram program;
    program.entry_count = static_cast<int>(root.size());
    for (int idx = 0; idx < program.entry_count; ++idx) {
        const nlohmann::json& entry = root[idx];
        const std::string at = "entry " + std::to_string(idx) + ": ";
        if (!entry.is_array()) throw ParseError(at + "must be an array", idx);
        if (entry.size() == 2) {
            if (!entry[0].is_string() || !entry[1].is_string())
                throw ParseError(at + "description entries are [id, text]", idx);
            program.descriptions.push_back({idx, entry[0].get<std::string>(), entry[1].get<std::string>()});
            continue;
        }
        if (entry.size() != 4) throw ParseError(at + "arity " + std::to_string(entry.size()) +
                                                " (descriptions have 2 fields, statements 4)", idx);
        Statement st;
        st.entry_index = idx;
        if (entry[0].is_string()) {
            st.subject = entry[0].get<std::string>();
        } else if (entry[0].is_array()) {
            st.subject_is_batch = true;
            for (const nlohmann::json& item : entry[0]) {
                if (!item.is_array() || item.size() != 2 || !item[0].is_string() || !item[1].is_number())
                    throw ParseError(at + "batch subjects are [[category, count], ...]", idx);
                st.batch.push_back({item[0].get<std::string>(), item[1].get<int>()});
            }
        } else {
            throw ParseError(at + "subject must be an id or a batch list", idx);
        }
        if (!entry[1].is_string()) throw ParseError(at + "relation must be a string", idx);
        st.relation_text = entry[1].get<std::string>();
        st.relation = relation_from_name(st.relation_text);
        if (entry[2].is_string()) {
            st.reference = entry[2].get<std::string>();
        } else if (entry[2].is_array()) {
            st.reference_is_list = true;
            for (const nlohmann::json& m : entry[2]) {
                if (!m.is_string()) throw ParseError(at + "member lists contain object ids", idx);
                st.member_list.push_back(m.get<std::string>());
            }
        } else {
            throw ParseError(at + "reference must be an id or a member list", idx);
        }
        if (!entry[3].is_object()) throw ParseError(at + "params must be an object", idx);
        st.params = entry[3];
        program.statements.push_back(std::move(st));
    }
    return program;
}

std::string PredicateProgram::serialize() const {
    nlohmann::json arr = nlohmann::json::array();
    size_t di = 0, si = 0;
    while (di < descriptions.size() || si < statements.size()) {
        const bool take_desc = si >= statements.size() ||
                               (di < descriptions.size() &&
                                descriptions[di].entry_index < statements[si].entry_index);
        if (take_desc) {
            arr.push_back({descriptions[di].id, descriptions[di].text});
            ++di;
        } else {
            const Statement& st = statements[si];
            nlohmann::json e = nlohmann::json::array();
            if (st.subject_is_batch) {
                nlohmann::json batch = nlohmann::json::array();
                for (const BatchItem& b : st.batch) batch.push_back({b.category, b.count});
                e.push_back(batch);
            } else {
                e.push_back(st.subject);
            }
            e.push_back(st.relation_text);
            if (st.reference_is_list)
                e.push_back(st.member_list);
            else
                e.push_back(st.reference);
            e.push_back(st.params);
            arr.push_back(e);
            ++si;
        }
    }
    return arr.dump();
}

namespace {

enum class EntityKind { Object, Group };

struct Introduction {
    EntityKind kind;
    int entry_index;
};

// First-introduction points for every id the program creates: descriptions,
// statement subjects, GROUP/COPY-GROUP names, and copied member ids.
std::map<std::string, Introduction> introduction_points(const PredicateProgram& program) {
    std::map<std::string, Introduction> intro;
    std::map<std::string, std::vector<std::string>> members;
    auto add = [&](const std::string& id, EntityKind kind, int idx) {
        if (!intro.count(id)) intro[id] = {kind, idx};
    };
    size_t di = 0, si = 0;
    while (di < program.descriptions.size() || si < program.statements.size()) {
        const bool take_desc =
            si >= program.statements.size() ||
            (di < program.descriptions.size() &&
             program.descriptions[di].entry_index < program.statements[si].entry_index);
        if (take_desc) {
            add(program.descriptions[di].id, EntityKind::Object, program.descriptions[di].entry_index);
            ++di;
            continue;
        }
        const Statement& st = program.statements[si];
        ++si;
        if (st.relation == Relation::Group) {
            add(st.subject, EntityKind::Group, st.entry_index);
            members[st.subject] = st.member_list;
        } else if (st.relation == Relation::CopyGroup) {
            add(st.subject, EntityKind::Group, st.entry_index);
            const auto src = members.find(st.reference);
            if (src != members.end()) {
                std::vector<std::string> copied;
                for (const std::string& m : src->second) {
                    const std::string id = copied_member_id(m, st.subject);
                    add(id, EntityKind::Object, st.entry_index);
                    copied.push_back(id);
                }
                members[st.subject] = copied;
            }
        } else if (!st.subject_is_batch && !st.subject.empty() && st.subject != "root") {
            add(st.subject, EntityKind::Object, st.entry_index);
        }
    }
    return intro;
}

const std::set<std::string>& allowed_params(Relation r) {
    static const std::set<std::string> distance{"distance"};
    static const std::set<std::string> none{};
    static const std::set<std::string> sym{"C"};
    static const std::set<std::string> base{"x", "y"};
    static const std::set<std::string> on{"x_offset", "y_offset", "overlap", "stability"};
    static const std::set<std::string> group{"anchor"};
    switch (r) {
        case Relation::LeftOf:
        case Relation::RightOf:
        case Relation::FrontOf:
        case Relation::BackOf: return distance;
        case Relation::SymmetryAlong: return sym;
        case Relation::PlaceOnBase: return base;
        case Relation::PlaceOn: return on;
        case Relation::Group: return group;
        default: return none;
    }
}

}  // namespace

std::vector<GrammarIssue> validate_grammar(const PredicateProgram& program, const AssetCatalog* catalog,
                                           double retrieval_threshold) {
    std::vector<GrammarIssue> issues;
    auto flag = [&](IssueKind kind, int idx, const std::string& subject, const std::string& detail) {
        issues.push_back({kind, idx, subject, detail});
    };

    const std::map<std::string, Introduction> intro = introduction_points(program);

    // Subjects that a PLACE-ON statement targets anywhere in the program;
    // their related statements belong to the PLACE-ON phase.
    std::set<std::string> place_on_subjects;
    for (const Statement& st : program.statements)
        if (st.relation == Relation::PlaceOn && !st.subject_is_batch) place_on_subjects.insert(st.subject);

    std::set<std::string> described;
    std::set<std::string> described_twice;
    for (const Description& d : program.descriptions) {
        if (d.id == "root") flag(IssueKind::SubjectIsRoot, d.entry_index, d.id, "'root' cannot be described");
        if (!described.insert(d.id).second && described_twice.insert(d.id).second)
            flag(IssueKind::DuplicateDescription, d.entry_index, d.id, "multiple descriptions for one id");
    }

    // Checks that depend on what has been introduced so far walk the merged
    // entry order.
    std::set<std::string> groups_defined;
    std::set<std::string> missing_desc_flagged;
    std::map<std::string, int> statements_per_subject;
    std::map<std::string, std::vector<int>> special_statements;  // subject -> special stmt entries
    int max_phase = 0;

    auto is_introduced_before = [&](const std::string& id, int idx) {
        const auto it = intro.find(id);
        return it != intro.end() && it->second.entry_index < idx;
    };
    auto reference_issue = [&](const std::string& id, int idx, const std::string& subject) {
        if (id == "root" || is_introduced_before(id, idx)) return;
        const auto it = intro.find(id);
        const std::string detail = it == intro.end()
                                       ? "'" + id + "' is never introduced"
                                       : "'" + id + "' is introduced later (entry " +
                                             std::to_string(it->second.entry_index) + ")";
        flag(IssueKind::ForwardReference, idx, subject, detail);
    };

    for (const Statement& st : program.statements) {
        const int idx = st.entry_index;
        const std::string& subj = st.subject;

        if (st.relation == Relation::Unknown) {
            flag(IssueKind::UnknownRelation, idx, subj, "unknown relation '" + st.relation_text + "'");
            continue;
        }

        // Statement phases: plain relational first, then PLACE-ON and the
        // predicates of PLACE-ON'd objects, finally PLACE-ANYWHERE.
        int phase;
        if (st.relation == Relation::PlaceAnywhere) phase = 2;
        else if (st.relation == Relation::PlaceOn || place_on_subjects.count(subj)) phase = 1;
        else if (st.relation == Relation::PlaceIn) phase = std::min(max_phase, 1);
        else phase = 0;
        if (phase < max_phase)
            flag(IssueKind::OrderingViolation, idx, subj,
                 std::string(relation_name(st.relation)) +
                     (max_phase == 2 ? " appears after a PLACE-ANYWHERE statement"
                                     : " appears after the PLACE-ON phase began"));
        max_phase = std::max(max_phase, phase);

        // Subject shape.
        if (st.subject_is_batch) {
            if (st.relation != Relation::PlaceIn) {
                flag(IssueKind::BatchNotAllowed, idx, "",
                     std::string("batch subjects are only valid with PLACE-IN, not ") +
                         relation_name(st.relation));
            }
            for (const BatchItem& b : st.batch) {
                if (b.count < 1)
                    flag(IssueKind::InvalidParamValue, idx, b.category, "batch count must be >= 1");
                if (b.category.empty())
                    flag(IssueKind::InvalidParamValue, idx, b.category, "batch category must be non-empty");
            }
        } else if (subj == "root") {
            flag(IssueKind::SubjectIsRoot, idx, subj, "'root' cannot be a statement subject");
        } else if (st.relation == Relation::Group || st.relation == Relation::CopyGroup) {
            if (subj.rfind("group_", 0) != 0)
                flag(IssueKind::GroupNameInvalid, idx, subj, "group names must start with 'group_'");
            if (!groups_defined.insert(subj).second)
                flag(IssueKind::GroupDuplicate, idx, subj, "group name already defined");
        } else {
            const auto it = intro.find(subj);
            const bool is_group = it != intro.end() && it->second.kind == EntityKind::Group;
            if (is_group) {
                if (!is_introduced_before(subj, idx))
                    flag(IssueKind::GroupUnknown, idx, subj, "group used before its definition");
                if (st.relation == Relation::PlaceAnywhere || st.relation == Relation::PlaceIn ||
                    st.relation == Relation::PlaceOn)
                    flag(IssueKind::SpecialNotAlone, idx, subj,
                         std::string(relation_name(st.relation)) + " cannot take a group subject");
            } else if (!described.count(subj) && missing_desc_flagged.insert(subj).second) {
                flag(IssueKind::MissingDescription, idx, subj,
                     "object used as subject without a retrieval description");
            }
        }

        if (!st.subject_is_batch) {
            ++statements_per_subject[subj];
            if (st.relation == Relation::PlaceIn || st.relation == Relation::PlaceAnywhere)
                special_statements[subj].push_back(idx);
        }

        // Reference shape and existence.
        switch (st.relation) {
            case Relation::Group: {
                if (!st.reference_is_list || st.member_list.empty()) {
                    flag(IssueKind::GroupMemberUnknown, idx, subj, "GROUP needs a non-empty member list");
                    break;
                }
                std::set<std::string> seen;
                for (const std::string& m : st.member_list) {
                    if (!seen.insert(m).second) {
                        flag(IssueKind::GroupMemberUnknown, idx, subj, "member '" + m + "' listed twice");
                        continue;
                    }
                    const auto mi = intro.find(m);
                    if (mi == intro.end() || mi->second.entry_index >= idx)
                        flag(IssueKind::GroupMemberUnknown, idx, subj,
                             "member '" + m + "' not introduced before the group");
                    else if (mi->second.kind != EntityKind::Object)
                        flag(IssueKind::GroupMemberUnknown, idx, subj, "member '" + m + "' is not an object");
                }
                const auto anchor = st.params.find("anchor");
                if (anchor == st.params.end())
                    flag(IssueKind::MissingParam, idx, subj, "GROUP requires params[\"anchor\"]");
                else if (!anchor->is_string() ||
                         std::find(st.member_list.begin(), st.member_list.end(),
                                   anchor->get<std::string>()) == st.member_list.end())
                    flag(IssueKind::GroupAnchorInvalid, idx, subj, "anchor must be one of the members");
                break;
            }
            case Relation::CopyGroup: {
                if (st.reference_is_list) {
                    flag(IssueKind::GroupUnknown, idx, subj, "COPY-GROUP takes a single group id");
                } else {
                    const auto it = intro.find(st.reference);
                    if (it == intro.end() || it->second.kind != EntityKind::Group ||
                        it->second.entry_index >= idx)
                        flag(IssueKind::GroupUnknown, idx, subj,
                             "source group '" + st.reference + "' is not defined before the copy");
                }
                break;
            }
            case Relation::PlaceOn: {
                if (st.reference == "root")
                    flag(IssueKind::PlaceOnRoot, idx, subj, "PLACE-ON reference cannot be 'root'");
                else if (!st.reference_is_list)
                    reference_issue(st.reference, idx, subj);
                break;
            }
            default: {
                if (st.reference_is_list)
                    flag(IssueKind::InvalidParamValue, idx, subj,
                         std::string("member lists are only valid with GROUP, not ") +
                             relation_name(st.relation));
                else
                    reference_issue(st.reference, idx, subj);
                break;
            }
        }

        // SYMMETRY-ALONG's mirror object.
        if (st.relation == Relation::SymmetryAlong) {
            const auto c = st.params.find("C");
            if (c == st.params.end())
                flag(IssueKind::MissingParam, idx, subj, "SYMMETRY-ALONG requires params[\"C\"]");
            else if (!c->is_string())
                flag(IssueKind::InvalidParamValue, idx, subj, "params[\"C\"] must be an object id");
            else
                reference_issue(c->get<std::string>(), idx, subj);
        }

        // Parameter keys and value types.
        const std::set<std::string>& allowed = allowed_params(st.relation);
        for (const auto& [key, value] : st.params.items()) {
            if (!allowed.count(key)) {
                flag(IssueKind::UnknownParam, idx, subj,
                     "'" + key + "' is not a parameter of " + relation_name(st.relation));
                continue;
            }
            if (key == "C" || key == "anchor") continue;  // checked above
            if (key == "stability") {
                if (!value.is_string() ||
                    (value.get<std::string>() != "stable" && value.get<std::string>() != "unstable"))
                    flag(IssueKind::InvalidParamValue, idx, subj, "stability must be \"stable\" or \"unstable\"");
                continue;
            }
            if (!value.is_number()) {
                flag(IssueKind::InvalidParamValue, idx, subj, "'" + key + "' must be a number");
                continue;
            }
            if (key == "overlap") {
                const double v = value.get<double>();
                if (v < 0.0 || v > 1.0)
                    flag(IssueKind::InvalidParamValue, idx, subj, "overlap must lie in [0, 1]");
            }
        }
    }

    // "Special predicates always comes alone": a PLACE-IN/PLACE-ANYWHERE
    // subject admits no other statement.
    for (const auto& [subj, specials] : special_statements) {
        if (statements_per_subject[subj] > 1)
            flag(IssueKind::SpecialNotAlone, specials.front(), subj,
                 "subject of a special predicate also appears in other statements");
    }

    if (catalog) {
        for (const Description& d : program.descriptions) {
            const RetrievalResult r = retrieve(*catalog, d.text, retrieval_threshold);
            if (!r.asset)
                flag(IssueKind::RetrievalMiss, d.entry_index, d.id,
                     "no catalog asset matches the description (best '" + r.best_id + "')");
        }
    }

    std::stable_sort(issues.begin(), issues.end(),
                     [](const GrammarIssue& a, const GrammarIssue& b) { return a.entry_index < b.entry_index; });
    return issues;
}

bool SolvednessReport::fully_solved(const std::string& id) const {
    const auto it = objects.find(id);
    return it != objects.end() && it->second.all();
}

SolvednessReport analyze_solvedness(const PredicateProgram& program) {
    SolvednessReport report;
    auto ensure = [&](const std::string& id) -> SolvednessFlags& {
        if (!report.objects.count(id)) {
            report.order.push_back(id);
            report.objects[id] = {};
        }
        return report.objects[id];
    };

    struct GroupInfo {
        std::vector<std::string> members;
        SolvednessFlags flags;
        bool copied = false;
    };
    std::map<std::string, GroupInfo> groups;
    std::vector<std::string> copied_group_order;

    for (const Description& d : program.descriptions)
        if (d.id != "root") ensure(d.id);

    for (const Statement& st : program.statements) {
        if (st.subject_is_batch) continue;  // batch objects materialize at solve time
        const std::string& subj = st.subject;
        if (subj == "root") continue;

        if (st.relation == Relation::Group) {
            GroupInfo info;
            info.members = st.member_list;
            groups[subj] = std::move(info);
            continue;
        }
        if (st.relation == Relation::CopyGroup) {
            GroupInfo info;
            const auto src = groups.find(st.reference);
            if (src != groups.end())
                for (const std::string& m : src->second.members)
                    info.members.push_back(copied_member_id(m, subj));
            info.copied = true;
            groups[subj] = std::move(info);
            copied_group_order.push_back(subj);
            continue;
        }

        SolvednessFlags* flags;
        const auto g = groups.find(subj);
        if (g != groups.end()) {
            flags = &g->second.flags;
        } else {
            flags = &ensure(subj);
        }

        switch (st.relation) {
            case Relation::FrontOf:
            case Relation::BackOf:
            case Relation::AlignCenterFB:
            case Relation::AlignFront:
            case Relation::AlignBack: flags->x = true; break;
            case Relation::LeftOf:
            case Relation::RightOf:
            case Relation::AlignCenterLR:
            case Relation::AlignLeft:
            case Relation::AlignRight: flags->y = true; break;
            case Relation::SymmetryAlong:
                flags->x = true;
                flags->y = true;
                break;
            case Relation::FacingTo:
            case Relation::FacingSameAs:
            case Relation::FacingOppositeTo:
            case Relation::FacingFront:
            case Relation::FacingBack:
            case Relation::FacingLeft:
            case Relation::FacingRight:
            case Relation::RandomRot:
            case Relation::OrientByRelativeSide: flags->yaw = true; break;
            case Relation::PlaceOnBase:
                flags->height = true;
                if (st.params.contains("x")) flags->x = true;
                if (st.params.contains("y")) flags->y = true;
                break;
            case Relation::PlaceOn:
                flags->x = true;
                flags->y = true;
                flags->height = true;
                if (g == groups.end()) report.physically_placed[subj] = true;
                break;
            case Relation::PlaceIn:
            case Relation::PlaceAnywhere:
                flags->x = true;
                flags->y = true;
                flags->height = true;
                flags->yaw = true;
                if (g == groups.end()) report.physically_placed[subj] = true;
                break;
            default: break;
        }
    }

    // Copied members take the copy's accumulated group flags; the copy fixes
    // their height (relative arrangement preserved, base heights kept).
    for (const std::string& gname : copied_group_order) {
        const GroupInfo& info = groups[gname];
        for (const std::string& m : info.members) {
            SolvednessFlags& f = ensure(m);
            f.x = info.flags.x;
            f.y = info.flags.y;
            f.yaw = info.flags.yaw;
            f.height = true;
        }
    }

    for (const std::string& id : report.order) {
        if (!report.objects[id].all() && !report.physically_placed.count(id))
            report.unsolved.push_back(id);
    }
    return report;
}

}  // namespace scenesmith
