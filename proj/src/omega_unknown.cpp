#include "omega/omega_unknown.hpp"

#include <stdexcept>
#include <string>

namespace omega {

UnknownState::UnknownState(ProcessId self, std::size_t channel_count, SimTime start_time, bool staleness_guard)
    : self_(self), leader_(self), known_{self}, pending_(channel_count), neighbor_of_(channel_count),
      staleness_guard_(staleness_guard), last_timeout_increase_(start_time), last_sequence_(channel_count, 0)
{
    if (self < 1) throw std::invalid_argument("process id must be >= 1");
    for (auto& p : pending_) p.insert(PendingEntry{Label::kNew, self});
}

int UnknownState::hopbound(ProcessId j) const
{
    if (j == self_) return static_cast<int>(known_.size());
    const auto it = monitors_.find(j);
    return it == monitors_.end() ? 0 : it->second.hopbound;
}

Duration UnknownState::timeout(ProcessId j) const
{
    const auto it = monitors_.find(j);
    return it == monitors_.end() ? 1 : it->second.timeout;
}

Timer UnknownState::timer(ProcessId j) const
{
    const auto it = monitors_.find(j);
    return it == monitors_.end() ? Timer::never() : it->second.timer;
}

UnknownState::Monitor& UnknownState::monitor(ProcessId j, SimTime now, std::vector<TimerArm>& arms)
{
    auto [it, inserted] = monitors_.try_emplace(j);
    if (inserted) {
        const auto gen = it->second.timer.arm(now, it->second.timeout);
        arms.push_back(TimerArm{TimerKey{j, 0}, *it->second.timer.deadline, gen});
    }
    return it->second;
}

std::vector<std::pair<ChannelId, AliveUnknown>> UnknownState::on_tick()
{
    std::vector<std::pair<ChannelId, AliveUnknown>> out;
    out.reserve(pending_.size());
    const int hb = hopbound(leader_);
    std::optional<std::uint64_t> seq;
    if (staleness_guard_) seq = next_sequence_++;
    for (ChannelId m = 0; m < pending_.size(); ++m) {
        AliveUnknown msg;
        if (hb > 1) msg.info = LeaderInfo{leader_, hb - 1};
        msg.pending.assign(pending_[m].begin(), pending_[m].end());
        msg.sequence = seq;
        out.emplace_back(m, std::move(msg));
    }
    return out;
}

std::vector<TimerArm> UnknownState::on_receive(SimTime now, ChannelId m, ProcessId from, const AliveUnknown& msg)
{
    std::vector<TimerArm> arms;
    if (m >= pending_.size()) throw std::invalid_argument("unknown channel");
    auto& bound = neighbor_of_[m];
    if (!bound)
        bound = from;
    else if (*bound != from)
        throw std::logic_error("channel " + std::to_string(m) + " bound to two neighbours");

    if (staleness_guard_ && msg.sequence) {
        if (*msg.sequence <= last_sequence_[m]) return arms;
        last_sequence_[m] = *msg.sequence;
    }

    // Membership pass.
    auto& here = pending_[m];
    std::set<ProcessId> announced;
    for (const auto& [label, k] : msg.pending) {
        if (label == Label::kNew) {
            announced.insert(k);
            if (!known_.contains(k)) {
                known_.insert(k);
                monitor(k, now, arms);
                for (ChannelId p = 0; p < pending_.size(); ++p)
                    if (p != m) pending_[p].insert(PendingEntry{Label::kNew, k});
            } else {
                here.erase(PendingEntry{Label::kNew, k});
            }
            here.insert(PendingEntry{Label::kAck, k});
        } else {
            here.erase(PendingEntry{Label::kNew, k});
        }
    }
    for (auto it = here.begin(); it != here.end();) {
        if (it->label == Label::kAck && !announced.contains(it->id))
            it = here.erase(it);
        else
            ++it;
    }

    // Leader pass.
    if (!msg.info) return arms;
    const ProcessId l = msg.info->leader;
    const int hb = msg.info->hopbound;
    if (l > leader_ || l == self_) return arms;
    leader_ = l;
    Monitor& mon = monitor(l, now, arms);
    const bool expired = mon.timer.expired(now);
    if (hb >= mon.hopbound || expired) {
        mon.hopbound = hb;
        if (expired) {
            mon.timeout *= 2;
            last_timeout_increase_ = now;
        }
        const auto gen = mon.timer.arm(now, mon.timeout);
        arms.push_back(TimerArm{TimerKey{l, 0}, *mon.timer.deadline, gen});
    }
    return arms;
}

bool UnknownState::on_timer_expire(SimTime now, ProcessId j, std::optional<std::uint64_t> generation)
{
    if (j != leader_ || leader_ == self_) return false;
    const auto it = monitors_.find(j);
    if (it == monitors_.end() || !it->second.timer.expired(now)) return false;
    if (generation && it->second.timer.generation != *generation) return false;
    leader_ = self_;
    return true;
}

void UnknownState::check_invariants() const
{
    auto fail = [this](const std::string& what) {
        throw std::logic_error("process " + std::to_string(self_) + ": " + what);
    };
    if (!known_.contains(self_)) fail("self missing from known set");
    if (leader_ > self_) fail("leader exceeds own id");
    for (const auto& set : pending_)
        for (const auto& e : set)
            if (e.label == Label::kNew && !known_.contains(e.id)) fail("pending NEW for an unknown id");
}

namespace {

std::size_t checked_channel_count(ProcessId self, const Digraph& g)
{
    if (g.out_neighbors(self) != g.in_neighbors(self))
        throw std::invalid_argument("unknown-membership processes need bidirectional channels");
    return g.out_edges(self).size();
}

}  // namespace

UnknownProcess::UnknownProcess(ProcessId self, const Digraph& g, SimTime start_time, bool staleness_guard)
    : state_(self, checked_channel_count(self, g), start_time, staleness_guard)
{
}

void UnknownProcess::on_tick(SimTime, std::vector<Outgoing>& out)
{
    for (auto& [m, msg] : state_.on_tick()) out.push_back(Outgoing{m, std::move(msg)});
}

void UnknownProcess::on_receive(SimTime local_now, std::size_t in_port, ProcessId from, const Message& msg,
                                std::vector<TimerArm>& arms)
{
    auto armed = state_.on_receive(local_now, in_port, from, std::get<AliveUnknown>(msg));
    arms.insert(arms.end(), armed.begin(), armed.end());
}

void UnknownProcess::on_timer(SimTime local_now, const TimerArm& fired)
{
    state_.on_timer_expire(local_now, fired.key.source, fired.generation);
}

}  // namespace omega
