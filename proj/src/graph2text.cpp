#include "kgrev/graph2text.hpp"

#include <cstdio>

namespace kgrev {

namespace {

std::string strip_leading_plus(const std::string& s) {
    return (!s.empty() && s[0] == '+') ? s.substr(1) : s;
}

std::string format_degrees(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string render_plain(const DeltaValue& v) { return v.plain_text(); }

}  // namespace

std::string render_value(const StatementValue& value, const LabelMap& labels) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, EntityRef>) {
                return labels.resolve(x.id);
            } else if constexpr (std::is_same_v<T, Text>) {
                return x.value;
            } else if constexpr (std::is_same_v<T, MonolingualText>) {
                return x.language + ": " + x.value;
            } else if constexpr (std::is_same_v<T, Quantity>) {
                std::string out = strip_leading_plus(x.amount);
                if (x.unit) out += " " + labels.resolve(*x.unit);
                return out;
            } else if constexpr (std::is_same_v<T, TimePoint>) {
                return strip_leading_plus(x.timestamp);
            } else if constexpr (std::is_same_v<T, Coordinate>) {
                return "lat " + format_degrees(x.latitude) + " lon " +
                       format_degrees(x.longitude);
            } else if constexpr (std::is_same_v<T, SomeValue>) {
                return "somevalue";
            } else {
                return "novalue";
            }
        },
        value);
}

std::string prefix_for(DeltaAction action, TargetFamily family) {
    std::string out = to_string(action);
    out += ' ';
    out += to_string(family);
    out += ':';
    return out;
}

TextualizedChange textualize(const ContentDelta& delta, const LabelMap& labels,
                             const TextualizeOptions& options) {
    TextualizedChange out;
    out.prefix = prefix_for(delta.action, delta.target.family);
    out.source_target = delta.target;

    const bool textual = delta.target.family != TargetFamily::Statement;
    if (textual) {
        out.language = delta.target.key;
        std::string body = delta.target.key + ": ";
        switch (delta.action) {
            case DeltaAction::Insert: body += render_plain(*delta.new_value); break;
            case DeltaAction::Remove: body += render_plain(*delta.old_value); break;
            case DeltaAction::Change:
                body += "old: " + render_plain(*delta.old_value) + " new: " +
                        render_plain(*delta.new_value);
                break;
        }
        out.body = std::move(body);
    } else {
        std::string body;
        if (options.include_subject_label && !options.subject_id.empty()) {
            body += labels.resolve(options.subject_id) + " ";
        }
        body += labels.resolve(delta.target.key);
        switch (delta.action) {
            case DeltaAction::Insert:
                body += " " + render_value(delta.new_value->triple_value(), labels);
                break;
            case DeltaAction::Remove:
                body += " " + render_value(delta.old_value->triple_value(), labels);
                break;
            case DeltaAction::Change:
                body += " old: " + render_value(delta.old_value->triple_value(), labels) +
                        " new: " + render_value(delta.new_value->triple_value(), labels);
                break;
        }
        out.body = std::move(body);
    }

    out.full_text = out.prefix + ' ' + out.body;
    if (options.max_chars > 0 && out.full_text.size() > options.max_chars) {
        out.full_text.resize(options.max_chars);
    }
    return out;
}

std::vector<TextualizedChange> textualize_revision(const std::vector<ContentDelta>& deltas,
                                                   const LabelMap& labels,
                                                   const TextualizeOptions& options) {
    std::vector<TextualizedChange> out;
    out.reserve(deltas.size());
    for (const auto& d : deltas) out.push_back(textualize(d, labels, options));
    return out;
}

}  // namespace kgrev
