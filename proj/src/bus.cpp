#include "dtwin/bus.hpp"

#include "dtwin/error.hpp"

#include <algorithm>

namespace dtwin {

namespace {

std::vector<std::string_view> split(std::string_view s) {
    std::vector<std::string_view> levels;
    std::size_t start = 0;
    while (true) {
        const std::size_t slash = s.find('/', start);
        levels.push_back(s.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start));
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    return levels;
}

}  // namespace

bool valid_pattern(std::string_view pattern) {
    if (pattern.empty()) return false;
    const auto levels = split(pattern);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto level = levels[i];
        if (level.empty()) return false;
        if (level == "#" && i + 1 != levels.size()) return false;
        if (level != "#" && level != "+" && level.find_first_of("+#") != std::string_view::npos) return false;
    }
    return true;
}

bool valid_topic(std::string_view topic) {
    return valid_pattern(topic) && topic.find_first_of("+#") == std::string_view::npos;
}

bool topic_matches(std::string_view pattern, std::string_view topic) {
    const auto p = split(pattern);
    const auto t = split(topic);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == "#") return true;
        if (i >= t.size()) return false;
        if (p[i] != "+" && p[i] != t[i]) return false;
    }
    return p.size() == t.size();
}

Message Subscription::pop() {
    if (queue_.empty()) fail(ErrorCode::invalid_argument, "subscription queue is empty");
    Message m = std::move(queue_.front());
    queue_.pop_front();
    return m;
}

std::vector<Message> Subscription::drain() {
    std::vector<Message> out(std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
    queue_.clear();
    return out;
}

std::shared_ptr<Subscription> Bus::subscribe(const std::string& pattern) {
    if (!valid_pattern(pattern)) fail(ErrorCode::malformed_topic, "malformed topic pattern '" + pattern + "'");
    auto sub = std::make_shared<Subscription>(pattern);
    subscriptions_.push_back(sub);
    return sub;
}

void Bus::unsubscribe(const std::shared_ptr<Subscription>& sub) {
    std::erase_if(subscriptions_, [&](const std::weak_ptr<Subscription>& w) {
        const auto s = w.lock();
        return !s || s == sub;
    });
}

std::size_t Bus::publish(const std::string& topic, Message message) {
    if (!valid_topic(topic)) fail(ErrorCode::malformed_topic, "malformed topic '" + topic + "'");
    message.topic = topic;
    publishers_[topic].insert(message.publisher);
    std::erase_if(subscriptions_, [](const std::weak_ptr<Subscription>& w) { return w.expired(); });
    std::size_t delivered = 0;
    for (const auto& w : subscriptions_) {
        const auto sub = w.lock();
        if (sub && topic_matches(sub->pattern_, topic)) {
            sub->queue_.push_back(message);
            ++delivered;
        }
    }
    return delivered;
}

std::set<std::string> Bus::publishers(const std::string& topic) const {
    const auto it = publishers_.find(topic);
    return it == publishers_.end() ? std::set<std::string>{} : it->second;
}

std::vector<std::string> Bus::topics() const {
    std::vector<std::string> out;
    for (const auto& [t, _] : publishers_) out.push_back(t);
    return out;
}

}  // namespace dtwin
