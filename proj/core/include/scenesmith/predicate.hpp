#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenesmith/asset.hpp"

namespace scenesmith {

// Placement-predicate wire format: a JSON array whose entries are either
//   ["object_id", "description text"]                       (length 2)
//   [subject, "RELATION", reference, {params}]              (length 4)
// subject is an object/group id, or a [["category", count], ...] batch list
// (PLACE-IN only).  reference is an id, "root", or a member-id list (GROUP).

enum class Relation {
    LeftOf,
    RightOf,
    FrontOf,
    BackOf,
    AlignCenterLR,
    AlignCenterFB,
    AlignLeft,
    AlignRight,
    AlignFront,
    AlignBack,
    SymmetryAlong,
    FacingTo,
    FacingSameAs,
    FacingOppositeTo,
    FacingFront,
    FacingBack,
    FacingLeft,
    FacingRight,
    RandomRot,
    OrientByRelativeSide,
    PlaceOnBase,
    PlaceOn,
    Group,
    CopyGroup,
    PlaceIn,
    PlaceAnywhere,
    Unknown,
};

constexpr int kRelationCount = 26;

const char* relation_name(Relation r);
// "SIDE-SCALE-ALIGN" is accepted as an alias of ORIENT-BY-RELATIVE-SIDE.
Relation relation_from_name(const std::string& name);

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, int entry_index)
        : std::runtime_error(what), entry_index(entry_index) {}
    // Index of the offending entry in the wire array, -1 when the whole text
    // failed to parse as JSON.
    int entry_index = -1;
};

struct BatchItem {
    std::string category;
    int count = 0;
};

struct Description {
    int entry_index = -1;
    std::string id;
    std::string text;
};

struct Statement {
    int entry_index = -1;
    std::string subject;                 // empty when the subject is a batch list
    std::vector<BatchItem> batch;
    bool subject_is_batch = false;
    std::string relation_text;           // relation as written
    Relation relation = Relation::Unknown;
    std::string reference;               // empty when the reference is a list
    std::vector<std::string> member_list;
    bool reference_is_list = false;
    nlohmann::json params = nlohmann::json::object();

    double param_number(const std::string& key, double fallback) const;
};

struct PredicateProgram {
    std::vector<Description> descriptions;
    std::vector<Statement> statements;
    int entry_count = 0;

    // Canonical wire text (compact JSON, params keys sorted); a fixed point
    // of parse_program.
    std::string serialize() const;

    const Description* description_for(const std::string& id) const;
};

// Accepts the raw model output: markdown code fences are stripped before the
// JSON parse.  Throws ParseError on malformed text or entries.
PredicateProgram parse_program(const std::string& text);

enum class IssueKind {
    UnknownRelation,
    ForwardReference,
    UnknownReference,
    MissingDescription,
    DuplicateDescription,
    SubjectIsRoot,
    PlaceOnRoot,
    MissingParam,
    InvalidParamValue,
    UnknownParam,
    GroupNameInvalid,
    GroupDuplicate,
    GroupUnknown,
    GroupMemberUnknown,
    GroupAnchorInvalid,
    BatchNotAllowed,
    SpecialNotAlone,
    OrderingViolation,
    RetrievalMiss,
    NotFullySolved,
};

const char* issue_kind_name(IssueKind kind);

struct GrammarIssue {
    IssueKind kind;
    int entry_index = -1;     // -1 for program-level issues
    std::string subject;      // object/group the issue is about (may be empty)
    std::string detail;       // human-readable specifics
};

// Structural checks from the grammar rules: relation names, reference
// ordering, group conventions, parameter shapes, statement ordering and
// special-predicate isolation.  With a catalog, descriptions that retrieve
// nothing above `threshold` are flagged too.
std::vector<GrammarIssue> validate_grammar(const PredicateProgram& program,
                                           const AssetCatalog* catalog = nullptr,
                                           double retrieval_threshold = 0.3);

struct SolvednessFlags {
    bool x = false, y = false, height = false, yaw = false;
    bool all() const { return x && y && height && yaw; }
};

struct SolvednessReport {
    // Concrete object ids (copied-group members included) in introduction order.
    std::vector<std::string> order;
    std::map<std::string, SolvednessFlags> objects;
    // Subjects of PLACE-ON / PLACE-IN / PLACE-ANYWHERE; their remaining
    // freedoms are fixed by the physical solver, so they are exempt from the
    // fully-solved requirement.
    std::map<std::string, bool> physically_placed;
    // Objects that must be reported back to the agent as under-constrained.
    std::vector<std::string> unsolved;

    bool fully_solved(const std::string& id) const;
};

// Which degrees of freedom each statement pins down:
//   x:      FRONT-OF BACK-OF ALIGN-CENTER-FB ALIGN-FRONT ALIGN-BACK
//           SYMMETRY-ALONG PLACE-ON PLACE-ON-BASE(with "x")
//   y:      LEFT-OF RIGHT-OF ALIGN-CENTER-LR ALIGN-LEFT ALIGN-RIGHT
//           SYMMETRY-ALONG PLACE-ON PLACE-ON-BASE(with "y")
//   height: PLACE-ON-BASE PLACE-ON
//   yaw:    FACING-* RANDOM-ROT ORIENT-BY-RELATIVE-SIDE
//   all:    PLACE-IN PLACE-ANYWHERE
// Group-level statements propagate to members; COPY-GROUP members take the
// copied group's final x/y/yaw and are height-solved by the copy itself.
SolvednessReport analyze_solvedness(const PredicateProgram& program);

// Ids a COPY-GROUP stamps out: "{member}-{new_group}".
std::string copied_member_id(const std::string& member, const std::string& new_group);

}  // namespace scenesmith
