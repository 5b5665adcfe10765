#include "omega/omega_known.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace omega {

std::optional<int> select_hopbound(std::span<const HopboundCandidate> not_expired)
{
    if (not_expired.empty()) return std::nullopt;
    int best_penalty = not_expired.front().penalty;
    for (const auto& c : not_expired) best_penalty = std::min(best_penalty, c.penalty);
    int best = 0;
    for (const auto& c : not_expired)
        if (c.penalty == best_penalty) best = std::max(best, c.hopbound);
    return best;
}

std::optional<int> select_hopbound(std::span<const HopboundCandidate> not_expired, HopboundPolicy policy)
{
    if (policy == HopboundPolicy::kPenalized) return select_hopbound(not_expired);
    if (not_expired.empty()) return std::nullopt;
    int best = 0;
    for (const auto& c : not_expired) best = std::max(best, c.hopbound);
    return best;
}

KnownState::KnownState(ProcessId self, std::uint32_t n, std::vector<ProcessId> out_neighbors,
                       std::vector<ProcessId> in_neighbors, SimTime start_time, HopboundPolicy policy)
    : self_(self), n_(n), leader_(self), hopbound_(n + 1, 0), out_neighbors_(std::move(out_neighbors)),
      in_neighbors_(std::move(in_neighbors)), start_time_(start_time), policy_(policy),
      last_timeout_increase_(start_time)
{
    if (self < 1 || self > n) throw std::invalid_argument("process id outside 1..n");
    hopbound_[self] = static_cast<int>(n);
}

KnownState::Slot KnownState::initial_slot(int x) const
{
    Slot s;
    s.hopbound = x;
    s.timer.deadline = start_time_ + 1;
    return s;
}

const KnownState::Slot* KnownState::find(ProcessId j, int x) const
{
    const auto row = rows_.find(j);
    if (row == rows_.end()) return nullptr;
    const auto it = std::lower_bound(row->second.begin(), row->second.end(), x,
                                     [](const Slot& s, int v) { return s.hopbound < v; });
    return (it != row->second.end() && it->hopbound == x) ? &*it : nullptr;
}

KnownState::Slot* KnownState::find(ProcessId j, int x)
{
    return const_cast<Slot*>(static_cast<const KnownState&>(*this).find(j, x));
}

KnownState::Slot& KnownState::slot(ProcessId j, int x)
{
    auto& row = rows_[j];
    auto it = std::lower_bound(row.begin(), row.end(), x, [](const Slot& s, int v) { return s.hopbound < v; });
    if (it == row.end() || it->hopbound != x) it = row.insert(it, initial_slot(x));
    return *it;
}

Duration KnownState::timeout(ProcessId j, int x) const
{
    const Slot* s = find(j, x);
    return s ? s->timeout : 1;
}

Timer KnownState::timer(ProcessId j, int x) const
{
    if (j == self_) return Timer::never();
    const Slot* s = find(j, x);
    return s ? s->timer : initial_slot(x).timer;
}

int KnownState::penalty(ProcessId j, int x) const
{
    const Slot* s = find(j, x);
    return s ? s->penalty : -1;
}

std::vector<std::pair<ProcessId, AliveKnown>> KnownState::on_tick() const
{
    std::vector<std::pair<ProcessId, AliveKnown>> out;
    const int hb = hopbound_[leader_];
    if (hb <= 1) return out;
    out.reserve(out_neighbors_.size());
    for (ProcessId j : out_neighbors_) out.emplace_back(j, AliveKnown{leader_, hb - 1});
    return out;
}

std::vector<HopboundCandidate> KnownState::not_expired(SimTime now) const
{
    std::vector<HopboundCandidate> out;
    if (leader_ == self_) {
        out.push_back({static_cast<int>(n_), -1});
        return out;
    }
    const auto row = rows_.find(leader_);
    if (row == rows_.end()) return out;
    for (const auto& s : row->second)
        if (!s.timer.expired(now)) out.push_back({s.hopbound, s.penalty});
    return out;
}

void KnownState::reselect_hopbound(SimTime now)
{
    const auto candidates = not_expired(now);
    if (auto hb = select_hopbound(candidates, policy_)) hopbound_[leader_] = *hb;
}

std::optional<TimerArm> KnownState::on_receive(SimTime now, ProcessId l, int hb)
{
    if (l == self_) return std::nullopt;
    if (l < 1 || l > n_) throw std::invalid_argument("ALIVE leader outside 1..n");
    if (hb < 1 || static_cast<std::uint32_t>(hb) > n_ - 1) throw std::invalid_argument("ALIVE hopbound outside 1..n-1");
    if (l > leader_) return std::nullopt;

    leader_ = l;
    Slot& s = slot(l, hb);
    if (s.timer.expired(now)) {
        s.timeout *= 2;
        last_timeout_increase_ = now;
    }
    const auto generation = s.timer.arm(now, s.timeout);
    const TimerArm arm{TimerKey{l, hb}, *s.timer.deadline, generation};
    reselect_hopbound(now);
    return arm;
}

bool KnownState::on_timer_expire(SimTime now, ProcessId j, int hb, std::optional<std::uint64_t> generation)
{
    if (j != leader_ || leader_ == self_) return false;
    Slot* s = find(j, hb);
    if (s == nullptr || !s->timer.expired(now)) return false;
    if (generation && s->timer.generation != *generation) return false;

    s->penalty += 1;
    const auto& row = rows_.at(leader_);
    const bool all_expired = std::all_of(row.begin(), row.end(), [now](const Slot& x) { return x.timer.expired(now); });
    if (all_expired)
        leader_ = self_;
    else
        reselect_hopbound(now);
    return true;
}

void KnownState::check_invariants() const
{
    auto fail = [this](const std::string& what) {
        throw std::logic_error("process " + std::to_string(self_) + ": " + what);
    };
    if (leader_ < 1 || leader_ > n_) fail("leader outside 1..n");
    if (leader_ > self_) fail("leader exceeds own id");
    if (hopbound_[self_] != static_cast<int>(n_)) fail("own hopbound changed");
    for (const auto& [j, row] : rows_) {
        for (const auto& s : row) {
            if (s.penalty < -1) fail("penalty below -1");
            if (s.timeout < 1 || !std::has_single_bit(static_cast<std::uint64_t>(s.timeout)))
                fail("timeout not a power of two");
        }
    }
}

KnownProcess::KnownProcess(ProcessId self, const Digraph& g, SimTime start_time, HopboundPolicy policy)
    : state_(self, g.n(), g.out_neighbors(self), g.in_neighbors(self), start_time, policy)
{
    const auto& outs = state_.out_neighbors();
    for (std::size_t i = 0; i < outs.size(); ++i) port_of_[outs[i]] = i;
}

void KnownProcess::on_tick(SimTime, std::vector<Outgoing>& out)
{
    for (auto& [to, msg] : state_.on_tick()) out.push_back(Outgoing{port_of_.at(to), msg});
}

void KnownProcess::on_receive(SimTime local_now, std::size_t, ProcessId, const Message& msg, std::vector<TimerArm>& arms)
{
    const auto& alive = std::get<AliveKnown>(msg);
    if (auto arm = state_.on_receive(local_now, alive.leader, alive.hopbound)) arms.push_back(*arm);
}

void KnownProcess::on_timer(SimTime local_now, const TimerArm& fired)
{
    state_.on_timer_expire(local_now, fired.key.source, fired.key.hopbound, fired.generation);
}

}  // namespace omega
