/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/session_registry.hpp"

#include <sstream>

namespace smoker::broker {

ConflictAction SessionRegistry::resolve_conflict(const std::string& client_id,
                                                 bool newcomer_authenticated) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(client_id);
    if (it == sessions_.end()) return ConflictAction::Admit;
    if (it->second.authenticated && !newcomer_authenticated)
        return ConflictAction::RejectNewcomer;
    return ConflictAction::EvictIncumbent;
}

SessionRegistry::AdmitResult SessionRegistry::admit(const std::string& client_id,
                                                    bool authenticated, std::uint64_t conn_id) {
    std::lock_guard lock(mu_);
    AdmitResult result;
    auto it = sessions_.find(client_id);
    if (it != sessions_.end()) {
        if (it->second.authenticated && !authenticated) {
            result.action = ConflictAction::RejectNewcomer;
            return result;
        }
        result.action = ConflictAction::EvictIncumbent;
        result.evicted_conn = it->second.conn_id;
        owner_.erase(it->second.conn_id);
        sessions_.erase(it);
    }
    SessionRecord record;
    record.client_id = client_id;
    record.authenticated = authenticated;
    record.conn_id = conn_id;
    sessions_.emplace(client_id, std::move(record));
    owner_[conn_id] = client_id;
    return result;
}

void SessionRegistry::remove_conn(std::uint64_t conn_id) {
    std::lock_guard lock(mu_);
    auto it = owner_.find(conn_id);
    if (it == owner_.end()) return;
    sessions_.erase(it->second);
    owner_.erase(it);
}

bool SessionRegistry::subscribe(std::uint64_t conn_id, const std::string& topic) {
    std::lock_guard lock(mu_);
    auto it = owner_.find(conn_id);
    if (it == owner_.end()) return false;
    sessions_[it->second].subscriptions.insert(topic);
    return true;
}

std::vector<std::uint64_t> SessionRegistry::subscribers_of(const std::string& topic) const {
    std::lock_guard lock(mu_);
    std::vector<std::uint64_t> out;
    for (const auto& [id, record] : sessions_)
        if (record.subscriptions.count(topic)) out.push_back(record.conn_id);
    return out;
}

std::optional<SessionRecord> SessionRegistry::find(const std::string& client_id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(client_id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

bool SessionRegistry::conn_is_live(std::uint64_t conn_id) const {
    std::lock_guard lock(mu_);
    return owner_.count(conn_id) != 0;
}

std::size_t SessionRegistry::size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

std::string SessionRegistry::dump() const {
    std::lock_guard lock(mu_);
    std::ostringstream out;
    for (const auto& [id, record] : sessions_)
        out << id << '\t' << (record.authenticated ? 1 : 0) << '\t'
            << record.subscriptions.size() << '\n';
    return out.str();
}

}  // namespace smoker::broker
