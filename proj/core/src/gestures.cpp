#include "sightline/gestures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "sightline/errors.hpp"

namespace sightline {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTranslateThreshold = kPi / 6.0;
constexpr double kRotateThreshold = kPi / 12.0;

}  // namespace

std::string_view hand_name(Hand hand) { return hand == Hand::Left ? "left" : "right"; }

Hand hand_from_name(std::string_view name) {
    if (name == "left") return Hand::Left;
    if (name == "right") return Hand::Right;
    throw Error(ErrorKind::Validation, "unknown hand: " + std::string(name));
}

std::string_view gesture_status_name(GestureStatus status) {
    switch (status) {
        case GestureStatus::Point: return "point";
        case GestureStatus::Open: return "open";
        case GestureStatus::Close: return "close";
        case GestureStatus::None: return "none";
    }
    return "none";
}

GestureStatus gesture_status_from_name(std::string_view name) {
    if (name == "point") return GestureStatus::Point;
    if (name == "open") return GestureStatus::Open;
    if (name == "close") return GestureStatus::Close;
    if (name == "none") return GestureStatus::None;
    throw Error(ErrorKind::Validation, "unknown gesture status: " + std::string(name));
}

std::string_view manipulation_kind_name(Manipulation::Kind kind) {
    switch (kind) {
        case Manipulation::Kind::Translate: return "translate";
        case Manipulation::Kind::Rotate: return "rotate";
        case Manipulation::Kind::Scale: return "scale";
        case Manipulation::Kind::NoOp: return "no_op";
    }
    return "no_op";
}

Manipulation classify_pair(const GestureFrame& left_t0, const GestureFrame& right_t0,
                           const GestureFrame& left_t1, const GestureFrame& right_t1) {
    const GestureStatus s = left_t0.status;
    if (s != GestureStatus::Close && s != GestureStatus::Open)
        throw Error(ErrorKind::InconsistentGesture,
                    "manipulation frames must be Close or Open gestures");
    if (right_t0.status != s || left_t1.status != s || right_t1.status != s)
        throw Error(ErrorKind::InconsistentGesture,
                    "all four frames must share the same gesture status");
    if (!(left_t1.time > left_t0.time) || !(right_t1.time > right_t0.time))
        throw Error(ErrorKind::Validation, "classify_pair requires t1 > t0");

    Manipulation m;
    const Vec3 v_left = left_t1.position - left_t0.position;
    const Vec3 v_right = right_t1.position - right_t0.position;
    if (v_left.norm() == 0.0 && v_right.norm() == 0.0) return m;  // NoOp

    m.theta1 = angle_between(v_left, v_right);
    if (m.theta1 < kTranslateThreshold) {
        m.kind = Manipulation::Kind::Translate;
        m.translation = (v_left + v_right) * 0.5;
        return m;
    }

    const Vec3 v0 = left_t0.position - right_t0.position;
    const Vec3 v1 = left_t1.position - right_t1.position;
    if (v0.norm() == 0.0 || v1.norm() == 0.0) return m;  // hands coincide: NoOp

    m.theta2 = angle_between(v0, v1);
    if (m.theta2 > kRotateThreshold) {
        m.kind = Manipulation::Kind::Rotate;
        m.rotation_angle = signed_ground_angle(v0, v1);
        return m;
    }

    m.kind = Manipulation::Kind::Scale;
    const double uniform = v1.norm() / v0.norm();
    auto axis_factor = [&](double a0, double a1) {
        // Axes with no measurable initial separation fall back to the
        // uniform ratio.
        if (std::abs(a0) > 1e-3 * v0.norm() && std::abs(a1) > 0.0)
            return std::abs(a1) / std::abs(a0);
        return uniform;
    };
    m.scale_factors = {axis_factor(v0.x, v1.x), axis_factor(v0.y, v1.y),
                       axis_factor(v0.z, v1.z)};
    return m;
}

std::optional<std::string> select_object(const GestureFrame& point_frame,
                                         std::span<const SceneObject> objects,
                                         double threshold) {
    if (point_frame.status != GestureStatus::Point)
        throw Error(ErrorKind::Validation, "select requires a Point gesture");
    const SceneObject* best = nullptr;
    double best_dist = threshold;
    for (const auto& obj : objects) {
        const double dist = (obj.position - point_frame.position).norm();
        if (dist >= threshold) continue;
        if (!best || dist < best_dist || (dist == best_dist && obj.id < best->id)) {
            best = &obj;
            best_dist = dist;
        }
    }
    return best ? std::optional<std::string>(best->id) : std::nullopt;
}

bool orientation_stable(std::span<const GestureFrame> window, double threshold_rad) {
    if (window.size() < 2)
        throw Error(ErrorKind::Validation, "orientation_stable needs at least 2 frames");
    const Vec3 reference = window.front().orientation;
    for (const auto& frame : window.subspan(1))
        if (angle_between(reference, frame.orientation) >= threshold_rad) return false;
    return true;
}

Building apply_manipulation(const Building& building, const Manipulation& manipulation) {
    if (building.role != Role::Candidate)
        throw Error(ErrorKind::Validation,
                    "only candidate buildings can be manipulated ('" + building.id + "')");

    Building out = building;
    const Point3 pivot = building.centroid();

    switch (manipulation.kind) {
        case Manipulation::Kind::NoOp:
            break;
        case Manipulation::Kind::Translate: {
            const Vec3 v = manipulation.translation;
            for (auto& box : out.cuboids) box.center = box.center + v;
            for (auto& tri : out.mesh) {
                tri.a = tri.a + v;
                tri.b = tri.b + v;
                tri.c = tri.c + v;
            }
            break;
        }
        case Manipulation::Kind::Rotate: {
            const double a = manipulation.rotation_angle;
            const double ca = std::cos(a), sa = std::sin(a);
            auto rotate = [&](const Point3& p) {
                const Vec3 d = p - pivot;
                return Point3{pivot.x + d.x * ca - d.y * sa, pivot.y + d.x * sa + d.y * ca,
                              p.z};
            };
            for (auto& box : out.cuboids) {
                box.center = rotate(box.center);
                box.yaw = wrap_two_pi(box.yaw + a);
            }
            for (auto& tri : out.mesh) {
                tri.a = rotate(tri.a);
                tri.b = rotate(tri.b);
                tri.c = rotate(tri.c);
            }
            break;
        }
        case Manipulation::Kind::Scale: {
            const Vec3 f = manipulation.scale_factors;
            if (!(f.x > 0.0 && f.y > 0.0 && f.z > 0.0))
                throw Error(ErrorKind::Validation, "scale factors must be strictly positive");
            auto scale = [&](const Point3& p) {
                const Vec3 d = p - pivot;
                return Point3{pivot.x + d.x * f.x, pivot.y + d.y * f.y, pivot.z + d.z * f.z};
            };
            for (auto& box : out.cuboids) {
                box.center = scale(box.center);
                // Half extents scale along the box's own axes; this matches
                // the world axes exactly for yaw-0 boxes.
                box.half_extents = {box.half_extents.x * f.x, box.half_extents.y * f.y,
                                    box.half_extents.z * f.z};
            }
            for (auto& tri : out.mesh) {
                tri.a = scale(tri.a);
                tri.b = scale(tri.b);
                tri.c = scale(tri.c);
            }
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ingest state machine
// ---------------------------------------------------------------------------

GestureSession::GestureSession(std::vector<SceneObject> objects, GestureConfig config)
    : objects_(std::move(objects)), config_(config) {}

std::vector<GestureEvent> GestureSession::push(const GestureFrame& frame) {
    // Malformed frames: non-unit orientation while tracked, out-of-order time,
    // non-finite position.
    HandState& hand = frame.hand == Hand::Left ? left_ : right_;
    const bool bad_orientation = frame.status != GestureStatus::None &&
                                 std::abs(frame.orientation.norm() - 1.0) > 1e-6;
    if (bad_orientation || !frame.position.finite() || !std::isfinite(frame.time) ||
        frame.time <= hand.last_time) {
        ++skipped_;
        return {};
    }

    std::vector<GestureEvent> events;
    if (tick_dirty_ && frame.time > pending_tick_time_) {
        events = process_tick(pending_tick_time_);
        tick_dirty_ = false;
    }
    hand.seen = true;
    hand.frame = frame;
    hand.last_time = frame.time;
    pending_tick_time_ = frame.time;
    tick_dirty_ = true;
    return events;
}

std::vector<GestureEvent> GestureSession::finish() {
    std::vector<GestureEvent> events;
    if (tick_dirty_) {
        events = process_tick(pending_tick_time_);
        tick_dirty_ = false;
    }
    if (armed_) {
        GestureEvent released{.type = GestureEvent::Type::Released,
                              .time = pending_tick_time_};
        events.push_back(released);
        armed_ = false;
        consecutive_ = 0;
    }
    return events;
}

std::vector<GestureEvent> GestureSession::process_tick(double time) {
    std::vector<GestureEvent> events;

    auto release = [&] {
        if (armed_) {
            events.push_back({.type = GestureEvent::Type::Released, .time = time});
            armed_ = false;
        }
        consecutive_ = 0;
    };

    // Selection: a Point gesture highlights the nearest object; the same hand
    // opening up within the confirm window promotes it to a selection.
    for (const HandState* hs : {&left_, &right_}) {
        if (!hs->seen || hs->frame.time != time) continue;
        const GestureFrame& f = hs->frame;
        if (f.status == GestureStatus::Point) {
            auto id = select_object(f, objects_, config_.selection_threshold);
            if (id && (!highlighted_ || *highlighted_ != *id)) {
                events.push_back(
                    {.type = GestureEvent::Type::Highlight, .time = time, .object_id = *id});
            }
            highlighted_ = id;
            point_hand_ = f.hand;
            point_time_ = time;
            point_active_ = id.has_value();
        } else if (f.status == GestureStatus::Open && point_active_ &&
                   f.hand == point_hand_ && time - point_time_ <= config_.confirm_window) {
            if (highlighted_) {
                events.push_back({.type = GestureEvent::Type::Select,
                                  .time = time,
                                  .object_id = *highlighted_});
            }
            point_active_ = false;
            highlighted_.reset();
        }
    }

    if (!left_.seen || !right_.seen) return events;

    const GestureStatus ls = left_.frame.status, rs = right_.frame.status;
    const bool both_close = ls == GestureStatus::Close && rs == GestureStatus::Close;
    const bool both_open = ls == GestureStatus::Open && rs == GestureStatus::Open;
    const GestureStatus kind = both_close ? GestureStatus::Close
                               : both_open ? GestureStatus::Open
                                           : GestureStatus::None;

    if (kind == GestureStatus::None) {
        release();
        armed_kind_ = GestureStatus::None;
        return events;
    }

    // A palm flip between consecutive frames ends the running operation.
    const bool flipped =
        consecutive_ > 0 && kind == armed_kind_ &&
        (angle_between(prev_left_orientation_, left_.frame.orientation) >=
             config_.stability_threshold ||
         angle_between(prev_right_orientation_, right_.frame.orientation) >=
             config_.stability_threshold);

    if (kind != armed_kind_ || flipped) {
        release();
        armed_kind_ = kind;
        consecutive_ = 1;
    } else {
        ++consecutive_;
    }
    prev_left_orientation_ = left_.frame.orientation;
    prev_right_orientation_ = right_.frame.orientation;

    if (!armed_ && consecutive_ == config_.arm_frames) {
        armed_ = true;
        bar_left_ = left_.frame;
        bar_right_ = right_.frame;
        events.push_back({.type = GestureEvent::Type::InitialBar,
                          .time = time,
                          .endpoints = {bar_left_.position, bar_right_.position}});
        return events;
    }

    if (armed_ && consecutive_ > config_.arm_frames &&
        left_.frame.time > bar_left_.time && right_.frame.time > bar_right_.time) {
        const Manipulation m =
            classify_pair(bar_left_, bar_right_, left_.frame, right_.frame);
        if (m.kind == Manipulation::Kind::NoOp) return events;
        const bool navigation = kind == GestureStatus::Open;
        // The whole scene never rescales: an Open-handed Scale motion is
        // ignored.
        if (navigation && m.kind == Manipulation::Kind::Scale) return events;

        GestureEvent bar{.type = GestureEvent::Type::MovedBar,
                         .time = time,
                         .endpoints = {left_.frame.position, right_.frame.position}};
        if (m.kind == Manipulation::Kind::Translate) {
            bar.connector = {(bar_left_.position + bar_right_.position) * 0.5,
                             (left_.frame.position + right_.frame.position) * 0.5};
            bar.has_connector = true;
        }
        events.push_back(bar);
        events.push_back({.type = navigation ? GestureEvent::Type::Navigation
                                             : GestureEvent::Type::Manipulation,
                          .time = time,
                          .action = m});
    }
    return events;
}

std::vector<GestureEvent> ingest(std::span<const GestureFrame> frames,
                                 std::span<const SceneObject> objects,
                                 const GestureConfig& config) {
    GestureSession session({objects.begin(), objects.end()}, config);
    std::vector<GestureEvent> events;
    for (const auto& frame : frames) {
        auto batch = session.push(frame);
        events.insert(events.end(), batch.begin(), batch.end());
    }
    auto tail = session.finish();
    events.insert(events.end(), tail.begin(), tail.end());
    return events;
}

// ---------------------------------------------------------------------------
// Trace / event NDJSON
// ---------------------------------------------------------------------------

std::vector<GestureFrame> load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open trace file '" + path + "'");
    std::vector<GestureFrame> frames;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Validation, "trace line " + std::to_string(line_no) +
                                                   ": " + e.what());
        }
        GestureFrame f;
        f.time = j.at("t").get<double>();
        f.hand = hand_from_name(j.at("hand").get<std::string>());
        f.status = gesture_status_from_name(j.at("status").get<std::string>());
        const auto& p = j.at("p");
        f.position = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
        const auto& o = j.at("o");
        f.orientation = {o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()};
        frames.push_back(f);
    }
    return frames;
}

namespace {

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

void write_events_ndjson(std::span<const GestureEvent> events, std::ostream& out) {
    for (const auto& e : events) {
        json j;
        j["t"] = e.time;
        switch (e.type) {
            case GestureEvent::Type::Highlight:
                j["event"] = "highlight";
                j["id"] = e.object_id;
                break;
            case GestureEvent::Type::Select:
                j["event"] = "select";
                j["id"] = e.object_id;
                break;
            case GestureEvent::Type::InitialBar:
                j["event"] = "initial_bar";
                j["style"] = "initial";
                j["endpoints"] = json::array({vec_json(e.endpoints[0]), vec_json(e.endpoints[1])});
                break;
            case GestureEvent::Type::MovedBar:
                j["event"] = "moved_bar";
                j["style"] = "moved";
                j["endpoints"] = json::array({vec_json(e.endpoints[0]), vec_json(e.endpoints[1])});
                if (e.has_connector)
                    j["connector"] =
                        json::array({vec_json(e.connector[0]), vec_json(e.connector[1])});
                break;
            case GestureEvent::Type::Released:
                j["event"] = "released";
                break;
            case GestureEvent::Type::Manipulation:
            case GestureEvent::Type::Navigation: {
                j["event"] =
                    e.type == GestureEvent::Type::Manipulation ? "manipulation" : "navigation";
                const Manipulation& m = e.action;
                j["theta1"] = m.theta1;
                j["theta2"] = m.theta2;
                switch (m.kind) {
                    case Manipulation::Kind::Translate:
                        j["kind"] = e.type == GestureEvent::Type::Navigation ? "pan"
                                                                             : "translate";
                        j["vector"] = vec_json(m.translation);
                        break;
                    case Manipulation::Kind::Rotate:
                        j["kind"] = "rotate";
                        j["angle"] = m.rotation_angle;
                        break;
                    case Manipulation::Kind::Scale:
                        j["kind"] = "scale";
                        j["factors"] = vec_json(m.scale_factors);
                        break;
                    case Manipulation::Kind::NoOp:
                        j["kind"] = "no_op";
                        break;
                }
                break;
            }
        }
        out << j.dump() << "\n";
    }
}

}  // namespace sightline
