/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace smoker::broker {

/// Broker-side view of one live session. Everything here is public data:
/// no key material, nothing an observer of the channel could not learn.
struct SessionRecord {
    std::string client_id;
    bool authenticated = false;
    std::uint64_t conn_id = 0;
    std::set<std::string> subscriptions;
};

enum class ConflictAction {
    Admit,           // no incumbent with this clientID
    RejectNewcomer,  // incumbent authenticated, newcomer is not -> CONNACK 0x85
    EvictIncumbent,  // newcomer wins, incumbent gets disconnected immediately
};

/// Live sessions keyed by clientID, at most one connection per clientID.
/// All updates are linearized under one mutex so conflict arbitration has a
/// total order.
class SessionRegistry {
public:
    /// ClientID-stealing arbitration. An authenticated incumbent is never
    /// displaced by an unauthenticated newcomer; an authenticated newcomer
    /// displaces an unauthenticated incumbent immediately. Two
    /// authenticated parties hold the same secret, so the newest connection
    /// wins (standard session takeover).
    ConflictAction resolve_conflict(const std::string& client_id,
                                    bool newcomer_authenticated) const;

    struct AdmitResult {
        ConflictAction action = ConflictAction::Admit;
        std::optional<std::uint64_t> evicted_conn;
    };

    /// Applies resolve_conflict and, unless the newcomer is rejected,
    /// installs the session record. Atomic with respect to other admissions.
    AdmitResult admit(const std::string& client_id, bool authenticated, std::uint64_t conn_id);

    /// Removes the session owned by conn_id, if any (no-op for evicted
    /// connections whose record was already replaced).
    void remove_conn(std::uint64_t conn_id);

    /// Returns false when conn_id owns no session.
    bool subscribe(std::uint64_t conn_id, const std::string& topic);

    std::vector<std::uint64_t> subscribers_of(const std::string& topic) const;

    std::optional<SessionRecord> find(const std::string& client_id) const;
    bool conn_is_live(std::uint64_t conn_id) const;
    std::size_t size() const;

    /// Line-oriented dump: clientID <tab> authenticated <tab>
    /// n_subscriptions. This is the whole persisted state of the broker;
    /// it contains nothing an observer of the channel could not learn.
    std::string dump() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, SessionRecord> sessions_;
    std::unordered_map<std::uint64_t, std::string> owner_;
};

}  // namespace smoker::broker
