#pragma once

#include <compare>
#include <string>
#include <vector>

namespace mpst {

using Participant = std::string;
using Label = std::string;

enum class Polarity { send, receive };

/// A communication action on channel (from, to): `from to ! msg` is the
/// emission by `from`, `from to ? msg` the consumption by `to`.
struct Action {
    Participant from;
    Participant to;
    Polarity polarity = Polarity::send;
    Label msg;

    bool is_send() const { return polarity == Polarity::send; }
    bool is_receive() const { return polarity == Polarity::receive; }
    const Participant& subject() const { return is_send() ? from : to; }
    /// The other endpoint of the channel, seen from the subject.
    const Participant& peer() const { return is_send() ? to : from; }
    bool involves(const Participant& p) const { return from == p || to == p; }

    auto operator<=>(const Action&) const = default;
    bool operator==(const Action&) const = default;
};

inline Action send(Participant from, Participant to, Label msg) {
    return {std::move(from), std::move(to), Polarity::send, std::move(msg)};
}

inline Action receive(Participant from, Participant to, Label msg) {
    return {std::move(from), std::move(to), Polarity::receive, std::move(msg)};
}

/// Flip polarity, keep channel and message.
inline Action dual(const Action& a) {
    Action d = a;
    d.polarity = a.is_send() ? Polarity::receive : Polarity::send;
    return d;
}

std::vector<Action> dual(const std::vector<Action>& phi);

/// `AB!act` when both names are one character, `Buyer.Seller!title` otherwise.
std::string to_string(const Action& a);
std::string to_string(const std::vector<Action>& phi);

using Trace = std::vector<Action>;

} // namespace mpst
