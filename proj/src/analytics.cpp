/*
 * Copyright 2026 The envmon Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "envmon/analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "envmon/error.hpp"

namespace envmon::analytics {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string figure_text(double v) {
  return v == std::floor(v) ? fixed(v, 0) : fixed(v, 2);
}

ChannelReport make_channel(std::string name, std::string unit, std::span<const TimedValue> reference,
                           std::span<const TimedValue> measured, std::int64_t max_skew_ms) {
  ChannelReport ch;
  ch.name = std::move(name);
  ch.unit = std::move(unit);
  auto alignment = align_series(reference, measured, max_skew_ms);
  ch.dropped = alignment.dropped;

  double err_sum = 0.0;
  double ref_sum = 0.0;
  double meas_sum = 0.0;
  for (const auto& pair : alignment.pairs) {
    if (pair.reference == 0.0) {
      ++ch.skipped_zero_reference;
      continue;
    }
    err_sum += percentage_error_exact(pair.reference, pair.measured);
    ref_sum += pair.reference;
    meas_sum += pair.measured;
    ch.max_skew_ms = std::max(ch.max_skew_ms, pair.skew_ms());
    ch.aligned.push_back(pair);
  }
  ch.pairs = ch.aligned.size();
  if (ch.pairs == 0) {
    throw Error(Errc::EmptyOverlap, "no " + ch.name + " samples align with the reference series");
  }
  auto n = static_cast<double>(ch.pairs);
  ch.reference_mean = ref_sum / n;
  ch.measured_mean = meas_sum / n;
  ch.mean_pct_error = round_to(err_sum / n, 2);
  return ch;
}

const TimedValue* nearest(std::span<const TimedValue> series, std::int64_t t) {
  if (series.empty()) return nullptr;
  auto it = std::lower_bound(series.begin(), series.end(), t,
                             [](const TimedValue& v, std::int64_t x) { return v.timestamp_ms < x; });
  if (it == series.end()) return &series.back();
  if (it == series.begin()) return &*it;
  auto prev = std::prev(it);
  return (t - prev->timestamp_ms) <= (it->timestamp_ms - t) ? &*prev : &*it;
}

std::optional<ClarityLabel> try_classify(double t, double h, const ClarityThresholds& th) {
  try {
    return classify_clarity(t, h, th);
  } catch (const Error&) {
    return std::nullopt;
  }
}

void add_published_notes(ErrorReport& report) {
  for (const auto& fig : known_published_figures()) {
    const auto& ch = fig.channel == "temperature" ? report.temperature : report.humidity;
    bool present = std::any_of(ch.aligned.begin(), ch.aligned.end(), [&](const AlignedPair& p) {
      return p.reference == fig.reference && p.measured == fig.measured;
    });
    if (!present) continue;

    std::string head = "published " + fig.channel + " error for reference " +
                       figure_text(fig.reference) + ", measured " + figure_text(fig.measured) +
                       " is " + figure_text(fig.printed);
    double by_ref = percentage_error(fig.reference, fig.measured);
    double by_meas = fig.measured != 0.0 ? percentage_error(fig.measured, fig.reference) : NAN;
    if (reproduces_published_figure(fig)) {
      report.notes.push_back(head + ": consistent with " + fixed(by_ref, 2) + " after rounding");
    } else {
      report.notes.push_back(head + ": not reproducible under any standard percentage-error "
                             "definition (|m-r|/|r| = " + fixed(by_ref, 2) + ", |m-r|/|m| = " +
                             fixed(by_meas, 2) + ")");
    }
  }
}

}  // namespace

double round_to(double value, int decimals) noexcept {
  double scale = std::pow(10.0, decimals);
  // Nudge by a few ulps so values like 2.005 that print as x.xx5 round up.
  return std::round(value * scale * (1.0 + 4 * std::numeric_limits<double>::epsilon())) / scale;
}

double percentage_error_exact(double reference, double measured) {
  if (reference == 0.0) throw Error(Errc::ZeroReference, "percentage error undefined for reference 0");
  return std::fabs(measured - reference) / std::fabs(reference) * 100.0;
}

double percentage_error(double reference, double measured) {
  return round_to(percentage_error_exact(reference, measured), 2);
}

std::string_view to_string(ClarityLabel label) noexcept {
  switch (label) {
    case ClarityLabel::Clear: return "clear";
    case ClarityLabel::PartlyCloudy: return "partly cloudy";
    case ClarityLabel::Cloudy: return "cloudy";
  }
  return "?";
}

ClarityLabel classify_clarity(double temperature_c, double humidity_rh,
                              const ClarityThresholds& thresholds) {
  if (!(temperature_c >= -40.0 && temperature_c <= 80.0)) {
    throw Error(Errc::OutOfRange, "temperature " + fixed(temperature_c, 1) + " outside [-40, 80]");
  }
  if (!(humidity_rh >= 0.0 && humidity_rh <= 100.0)) {
    throw Error(Errc::OutOfRange, "humidity " + fixed(humidity_rh, 1) + " outside [0, 100]");
  }
  if (humidity_rh >= thresholds.cloudy_rh) {
    // At or below freezing the saturated case is fog/overcast; still Cloudy.
    return ClarityLabel::Cloudy;
  }
  if (humidity_rh >= thresholds.partly_cloudy_rh) return ClarityLabel::PartlyCloudy;
  return ClarityLabel::Clear;
}

Alignment align_series(std::span<const TimedValue> reference, std::span<const TimedValue> measured,
                       std::int64_t max_skew_ms) {
  Alignment out;
  std::vector<bool> used(reference.size(), false);
  auto by_ts = [](const TimedValue& v, std::int64_t t) { return v.timestamp_ms < t; };

  for (std::size_t mi = 0; mi < measured.size(); ++mi) {
    const auto t = measured[mi].timestamp_ms;
    auto split = static_cast<std::size_t>(
        std::lower_bound(reference.begin(), reference.end(), t, by_ts) - reference.begin());

    std::optional<std::size_t> left;
    for (std::size_t i = split; i-- > 0;) {
      if (t - reference[i].timestamp_ms > max_skew_ms) break;
      if (!used[i]) {
        left = i;
        break;
      }
    }
    std::optional<std::size_t> right;
    for (std::size_t i = split; i < reference.size(); ++i) {
      if (reference[i].timestamp_ms - t > max_skew_ms) break;
      if (!used[i]) {
        right = i;
        break;
      }
    }

    std::optional<std::size_t> pick;
    if (left && right) {
      auto dl = t - reference[*left].timestamp_ms;
      auto dr = reference[*right].timestamp_ms - t;
      pick = dl <= dr ? left : right;
    } else {
      pick = left ? left : right;
    }
    if (!pick) {
      ++out.dropped;
      continue;
    }
    used[*pick] = true;
    AlignedPair pair{mi, *pick, t, reference[*pick].timestamp_ms, measured[mi].value,
                     reference[*pick].value};
    out.max_skew_ms = std::max(out.max_skew_ms, pair.skew_ms());
    out.pairs.push_back(pair);
  }
  return out;
}

std::vector<TimedValue> temperature_channel(std::span<const SeriesPoint> series) {
  std::vector<TimedValue> out;
  out.reserve(series.size());
  for (const auto& p : series) out.push_back({p.timestamp_ms, p.temperature_c});
  return out;
}

std::vector<TimedValue> humidity_channel(std::span<const SeriesPoint> series) {
  std::vector<TimedValue> out;
  out.reserve(series.size());
  for (const auto& p : series) out.push_back({p.timestamp_ms, p.humidity_rh});
  return out;
}

std::span<const PublishedFigure> known_published_figures() noexcept {
  // reference value, measured value, printed percentage error
  static const std::array<PublishedFigure, 2> figures{{
      {"temperature", 6.0, 4.0, 20.0},
      {"humidity", 96.0, 98.0, 2.0},
  }};
  return figures;
}

bool reproduces_published_figure(const PublishedFigure& figure) {
  int decimals = figure.printed == std::floor(figure.printed) ? 0 : 2;
  auto matches = [&](double reference, double measured) {
    if (reference == 0.0) return false;
    return round_to(percentage_error_exact(reference, measured), decimals) == figure.printed;
  };
  return matches(figure.reference, figure.measured) || matches(figure.measured, figure.reference);
}

ErrorReport build_report(std::span<const SeriesPoint> reference,
                         std::span<const TimedValue> measured_temperature,
                         std::span<const TimedValue> measured_humidity, std::int64_t max_skew_ms,
                         const ClarityThresholds& thresholds) {
  auto ref_t = temperature_channel(reference);
  auto ref_h = humidity_channel(reference);

  ErrorReport report;
  report.temperature = make_channel("temperature", "C", ref_t, measured_temperature, max_skew_ms);
  report.humidity = make_channel("humidity", "%RH", ref_h, measured_humidity, max_skew_ms);

  for (const auto& pair : report.humidity.aligned) {
    const auto* temp = nearest(measured_temperature, pair.measured_ms);
    auto label = try_classify(temp->value, pair.measured, thresholds);
    if (!label) continue;
    const auto& ref = reference[pair.reference_index];
    report.clarity.push_back(
        {pair.measured_ms, *label, try_classify(ref.temperature_c, ref.humidity_rh, thresholds)});
  }

  report.notes.push_back(
      "percentage error = |measured - reference| / |reference| x 100, averaged over aligned pairs");
  add_published_notes(report);
  return report;
}

std::string render_text(const ErrorReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %12s %12s %10s %6s %8s\n", "channel", "reference",
                "measured", "pct_error", "pairs", "dropped");
  out += line;
  for (const auto* ch : {&report.temperature, &report.humidity}) {
    std::snprintf(line, sizeof(line), "%-12s %12.2f %12.2f %10.2f %6zu %8zu\n", ch->name.c_str(),
                  ch->reference_mean, ch->measured_mean, ch->mean_pct_error, ch->pairs, ch->dropped);
    out += line;
  }
  if (!report.clarity.empty()) {
    out += "\nclarity\n";
    for (const auto& row : report.clarity) {
      std::snprintf(line, sizeof(line), "  t=%lld measured=%s reference=%s\n",
                    static_cast<long long>(row.timestamp_ms), std::string(to_string(row.measured)).c_str(),
                    row.reference ? std::string(to_string(*row.reference)).c_str() : "n/a");
      out += line;
    }
  }
  out += "\nnotes\n";
  for (const auto& note : report.notes) out += "  - " + note + "\n";
  return out;
}

nlohmann::json to_json(const ErrorReport& report) {
  auto channel = [](const ChannelReport& ch) {
    return nlohmann::json{{"reference", ch.reference_mean},
                          {"measured", ch.measured_mean},
                          {"mean_pct_error", ch.mean_pct_error},
                          {"pairs", ch.pairs},
                          {"dropped", ch.dropped},
                          {"max_skew_ms", ch.max_skew_ms}};
  };
  nlohmann::json clarity = nlohmann::json::array();
  for (const auto& row : report.clarity) {
    nlohmann::json r{{"ts", row.timestamp_ms}, {"measured", to_string(row.measured)}};
    r["reference"] = row.reference ? nlohmann::json(to_string(*row.reference)) : nlohmann::json();
    clarity.push_back(std::move(r));
  }
  return {{"temperature", channel(report.temperature)},
          {"humidity", channel(report.humidity)},
          {"pairs", report.pairs()},
          {"dropped", report.dropped()},
          {"clarity", std::move(clarity)},
          {"notes", report.notes}};
}

}  // namespace envmon::analytics
