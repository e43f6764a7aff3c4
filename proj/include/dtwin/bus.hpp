#pragma once

#include "dtwin/geometry.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dtwin {

struct StateMsg {
    std::string agent;
    Pose pose;
};

struct ObservationMsg {
    std::string agent;
    std::vector<double> values;
};

struct ChannelParamsMsg {
    std::string rx;
    std::string tx;
    std::size_t num_paths = 0;
    double strongest_gain = 0.0;
    double first_delay = 0.0;
};

struct SignalMsg {
    std::string rx;
    double mean_rx_power = 0.0;  // watts per resource element, averaged over antennas and elements
    std::size_t resource_elements = 0;
};

struct EstimateMsg {
    std::string agent;
    Vec3 position = Vec3::Zero();
    double score = 0.0;
};

struct ControlMsg {
    std::string agent;
    double linear = 0.0;
    double angular = 0.0;
};

struct MetricMsg {
    std::string name;
    double value = 0.0;
};

struct TraceMsg {
    std::int64_t step = 0;
};

using Payload = std::variant<StateMsg, ObservationMsg, ChannelParamsMsg, SignalMsg, EstimateMsg, ControlMsg,
                             MetricMsg, TraceMsg>;

struct Message {
    std::string topic;
    std::int64_t step = 0;
    std::string publisher;
    Payload payload;
};

/// Topic names are '/'-separated levels. Patterns may use '+' for one level and a trailing '#' for any suffix.
bool valid_topic(std::string_view topic);
bool valid_pattern(std::string_view pattern);
bool topic_matches(std::string_view pattern, std::string_view topic);

class Subscription {
public:
    explicit Subscription(std::string pattern) : pattern_(std::move(pattern)) {}

    [[nodiscard]] const std::string& pattern() const { return pattern_; }
    [[nodiscard]] bool empty() const { return queue_.empty(); }
    [[nodiscard]] std::size_t pending() const { return queue_.size(); }

    Message pop();
    std::vector<Message> drain();

private:
    friend class Bus;
    std::string pattern_;
    std::deque<Message> queue_;
};

/// In-process, single-threaded publish/subscribe registry. Delivery is synchronous and ordered.
class Bus {
public:
    std::shared_ptr<Subscription> subscribe(const std::string& pattern);
    void unsubscribe(const std::shared_ptr<Subscription>& sub);

    /// Enqueues to every live matching subscription and returns how many received it.
    std::size_t publish(const std::string& topic, Message message);

    [[nodiscard]] std::set<std::string> publishers(const std::string& topic) const;
    [[nodiscard]] std::vector<std::string> topics() const;

private:
    std::vector<std::weak_ptr<Subscription>> subscriptions_;
    std::map<std::string, std::set<std::string>> publishers_;
};

}  // namespace dtwin
