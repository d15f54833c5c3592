#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mpst/action.hh"

namespace mpst {

struct Global;
struct Local;
using GlobalPtr = std::shared_ptr<const Global>;
using LocalPtr = std::shared_ptr<const Local>;

struct GlobalBranch {
    Label label;
    GlobalPtr cont;
};

struct LocalBranch {
    Label label;
    LocalPtr cont;
};

/// Global type node. Branches are kept sorted by label; `mid`, when set,
/// marks the message as sent but not yet received (the in-flight form).
struct Global {
    enum class Kind { branch, rec, var, end };

    Kind kind = Kind::end;
    Participant from;
    Participant to;
    std::optional<std::size_t> mid;
    std::vector<GlobalBranch> branches;
    std::string var;
    GlobalPtr body;

    bool is_end() const { return kind == Kind::end; }
    bool in_flight() const { return mid.has_value(); }
    const GlobalBranch* find(const Label& l) const;
};

struct Local {
    enum class Kind { send, recv, rec, var, end };

    Kind kind = Kind::end;
    Participant peer;
    std::vector<LocalBranch> branches;
    std::string var;
    LocalPtr body;

    bool is_end() const { return kind == Kind::end; }
    bool is_prefix() const { return kind == Kind::send || kind == Kind::recv; }
    const LocalBranch* find(const Label& l) const;
};

// Constructors. Branch lists are sorted by label; duplicate labels throw.
GlobalPtr g_end();
GlobalPtr g_var(std::string v);
GlobalPtr g_rec(std::string v, GlobalPtr body);
GlobalPtr g_branch(Participant from, Participant to, std::vector<GlobalBranch> bs,
                   std::optional<Label> in_flight = std::nullopt);
GlobalPtr g_msg(Participant from, Participant to, Label l, GlobalPtr cont);

LocalPtr l_end();
LocalPtr l_var(std::string v);
LocalPtr l_rec(std::string v, LocalPtr body);
LocalPtr l_send(Participant to, std::vector<LocalBranch> bs);
LocalPtr l_recv(Participant from, std::vector<LocalBranch> bs);

struct ParseOptions {
    /// Accept the `p ~> q : [a] {...}` form. Only for debugging fixtures.
    bool allow_in_flight = false;
};

GlobalPtr parse_global(std::string_view text, ParseOptions opts = {});
LocalPtr parse_local(std::string_view text);

std::string print(const GlobalPtr& g);
std::string print(const LocalPtr& t);

bool equal(const GlobalPtr& a, const GlobalPtr& b);
bool equal(const LocalPtr& a, const LocalPtr& b);

/// Equality up to consistent renaming of bound recursion variables.
bool alpha_equal(const GlobalPtr& a, const GlobalPtr& b);
bool alpha_equal(const LocalPtr& a, const LocalPtr& b);

/// Rename bound variables to t0, t1, ... in pre-order.
GlobalPtr rename_canonical(const GlobalPtr& g);
LocalPtr rename_canonical(const LocalPtr& t);

/// One-step unfolding of a top-level `rec`; other nodes are returned as is.
GlobalPtr unfold(const GlobalPtr& g);
LocalPtr unfold(const LocalPtr& t);

/// Unfold leading `rec` binders until a non-`rec` node is reached.
GlobalPtr unfold_all(const GlobalPtr& g);
LocalPtr unfold_all(const LocalPtr& t);

GlobalPtr substitute(const GlobalPtr& g, const std::string& v, const GlobalPtr& by);
LocalPtr substitute(const LocalPtr& t, const std::string& v, const LocalPtr& by);

std::set<std::string> free_vars(const GlobalPtr& g);
std::set<std::string> free_vars(const LocalPtr& t);

std::set<Participant> participants(const GlobalPtr& g);
std::set<Label> alphabet(const GlobalPtr& g);
std::set<Label> alphabet(const LocalPtr& t);

/// Throws ValidationError when a variable is free, shadowed, or unguarded,
/// or when a message has the same sender and receiver.
void check_closed_guarded(const GlobalPtr& g);
void check_closed_guarded(const LocalPtr& t);

/// Number of nodes; used by fuzzers and size bounds.
std::size_t size(const GlobalPtr& g);
std::size_t size(const LocalPtr& t);

} // namespace mpst
