#!/usr/bin/env python3
# Copyright 2026 The JITAI Bandit Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes pipeline/logs.jsonl and pipeline/expected.jsonl.

Each notification combines one case per sensor stream. A case lists the
records to emit (offsets in seconds from the notification) and the feature
values those records must produce. Expected values are written out by hand in
the case tables below; nothing here reuses the C++ join code.
"""

import datetime as dt
import json
import math
import pathlib

OUT = pathlib.Path(__file__).resolve().parent / "pipeline"

MIN = 60

# ---- battery: nearest record within 30 min, ties go to the earlier record ----
BATTERY = [
    ([(-10 * MIN, 55, "Discharging", False)], ("medium", "Discharging", "false")),
    ([(-30 * MIN, 40, "Charging", False)], ("medium", "Charging", "false")),
    ([(-30 * MIN - 1, 40, "Charging", False)], (None, None, None)),
    ([(30 * MIN, 90, "Full", False)], ("high", "Full", "false")),
    ([(30 * MIN + 1, 90, "Full", False)], (None, None, None)),
    ([(-5 * MIN, 80, "Charging", False), (5 * MIN, 15, "Discharging", True)], ("high", "Charging", "false")),
    ([(-6 * MIN, 80, "Charging", False), (4 * MIN, 15, "Discharging", True)], ("low", "Discharging", "true")),
    ([(-1 * MIN, 0, "Discharging", True)], ("critical", "Discharging", "true")),
    ([(-1 * MIN, 10, "Discharging", False)], ("critical", "Discharging", "false")),
    ([(-1 * MIN, 11, "Not Charging", False)], ("low", "Not Charging", "false")),
    ([(-1 * MIN, 20, "Discharging", False)], ("low", "Discharging", "false")),
    ([(-1 * MIN, 21, "Discharging", False)], ("medium", "Discharging", "false")),
    ([(-1 * MIN, 60, "Discharging", False)], ("medium", "Discharging", "false")),
    ([(-1 * MIN, 61, "Discharging", False)], ("high", "Discharging", "false")),
    ([(-1 * MIN, 100, "Full", False)], ("high", "Full", "false")),
    ([], (None, None, None)),
    ([(-40 * MIN, 70, "Charging", False), (20 * MIN, 30, "Discharging", False)], ("medium", "Discharging", "false")),
]

# ---- screen: nearest record within 30 min, ties go to the earlier record ----
SCREEN = [
    ([(-1 * MIN, True, True)], ("true", "true")),
    ([(30 * MIN, False, False)], ("false", "false")),
    ([(-30 * MIN - 1, True, True)], (None, None)),
    ([(-10 * MIN, True, False), (10 * MIN, False, False)], ("true", "false")),
    ([(-12 * MIN, False, False), (2 * MIN, True, True)], ("true", "true")),
    ([(-30 * MIN, True, False)], ("true", "false")),
    ([], (None, None)),
]

# ---- activity: mode over the closed 5-minute window ending at the notification;
# on_foot counts as walking; ties go to the label seen most recently ----
ACTIVITY = [
    ([(-2 * MIN, "still")], "still"),
    ([(-5 * MIN, "running")], "running"),
    ([(-5 * MIN - 1, "running")], None),
    ([(1, "walking")], None),
    ([(0, "tilting")], "tilting"),
    ([(-4 * MIN, "still"), (-3 * MIN, "still"), (-1 * MIN, "walking")], "still"),
    ([(-4 * MIN, "on_foot"), (-3 * MIN, "still"), (-2 * MIN, "walking"), (-1 * MIN, "still")], "still"),
    ([(-4 * MIN, "still"), (-3 * MIN, "on_foot"), (-2 * MIN, "still"), (-1 * MIN, "on_foot")], "walking"),
    ([(-2 * MIN, "on_foot")], "walking"),
    ([(-3 * MIN, "in_vehicle"), (-1 * MIN, "on_bicycle")], "on_bicycle"),
    ([(-1 * MIN, "in_vehicle"), (-3 * MIN, "on_bicycle")], "in_vehicle"),
    ([(-10 * MIN, "running"), (-8 * MIN, "running"), (-4 * MIN, "in_vehicle")], "in_vehicle"),
    ([], None),
]

# ---- app usage: most recent session start within the 30 minutes before ----
APPS = [
    ([(-10 * MIN, "com.whatsapp")], "communication_social"),
    ([(-30 * MIN, "com.spotify.music")], "entertainment_media"),
    ([(-30 * MIN - 1, "com.spotify.music")], None),
    ([(1 * MIN, "com.whatsapp")], None),
    ([(-20 * MIN, "com.google.android.youtube"), (-5 * MIN, "com.google.android.apps.docs")], "productivity_tools"),
    ([(-5 * MIN, "org.example.unlisted")], "other"),
    ([(-25 * MIN, "com.king.candycrushsaga"), (1 * MIN, "com.whatsapp")], "games_simulation"),
    ([(0, "com.phonepe.app")], "shopping_finance_travel"),
    ([(-3 * MIN, "com.calm.android")], "lifestyle_health"),
    ([], None),
]

# ---- calls: on a call when start <= t <= end ----
CALLS = [
    ([(-10 * MIN, 5 * MIN)], "true"),
    ([(-10 * MIN, 0)], "true"),
    ([(0, 4 * MIN)], "true"),
    ([(-10 * MIN, -1)], "false"),
    ([(1, 3 * MIN)], "false"),
    ([], "false"),
    ([(-20 * MIN, -15 * MIN), (-2 * MIN, 2 * MIN)], "true"),
]

# Places, mirrored from the places fixture written below.
CAMPUS = [[22.2900, 87.2900], [22.2900, 87.3100], [22.3100, 87.3100], [22.3100, 87.2900]]
PLACES = [
    ("central_lawn", 22.3000, 87.3000, "campus_open_area"),
    ("main_building", 22.3020, 87.3010, "academic_building_lab"),
    ("stadium", 22.2980, 87.3040, "sports_region"),
    ("food_court", 22.3010, 87.2970, "cafeteria_eatery"),
    ("hall_a", 22.2960, 87.2990, "dormitory_area"),
]
R_EARTH = 6371008.8


def north_of(lat, lon, metres):
    return lat + metres / (R_EARTH * math.pi / 180.0), lon


def distance_m(lat1, lon1, lat2, lon2):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp, dl = p2 - p1, math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * R_EARTH * math.asin(math.sqrt(h))


LAWN = (22.3000, 87.3000)
MAIN_40N = north_of(22.3020, 87.3010, 40.0)
LAWN_60N = north_of(22.3000, 87.3000, 60.0)
HALL_49N = north_of(22.2960, 87.2990, 49.0)
HALL_51N = north_of(22.2960, 87.2990, 51.0)
OFF_CAMPUS = (22.3200, 87.3000)

# ---- gps: nearest fix within 15 min; nearest place within 50 m, otherwise
# outside_campus when outside the polygon, otherwise nothing ----
GPS = [
    ([(-2 * MIN, *LAWN)], "campus_open_area"),
    ([(-1 * MIN, *MAIN_40N)], "academic_building_lab"),
    ([(-1 * MIN, *LAWN_60N)], None),
    ([(-1 * MIN, *OFF_CAMPUS)], "outside_campus"),
    ([(-15 * MIN, 22.2980, 87.3040)], "sports_region"),
    ([(-15 * MIN - 1, 22.2980, 87.3040)], None),
    ([(-10 * MIN, 22.2980, 87.3040), (3 * MIN, 22.3010, 87.2970)], "cafeteria_eatery"),
    ([(-5 * MIN, 22.2960, 87.2990), (5 * MIN, *OFF_CAMPUS)], "dormitory_area"),
    ([(-1 * MIN, *HALL_49N)], "dormitory_area"),
    ([(-1 * MIN, *HALL_51N)], None),
    ([(15 * MIN, *OFF_CAMPUS)], "outside_campus"),
    ([], None),
]

# Clock-time overrides for notification slots: (index, HH:MM:SS, expected time_of_day).
SLOTS = ["07:55:00", "10:55:00", "13:55:00", "16:55:00", "19:55:00"]
SLOT_BUCKET = ["morning", "morning", "afternoon", "evening", "evening"]
OVERRIDES = {
    0: ("06:59:59", None),
    5: ("07:00:00", "morning"),
    11: ("11:59:59", "morning"),
    17: ("12:00:00", "afternoon"),
    23: ("15:59:59", "afternoon"),
    28: ("16:00:00", "evening"),
    34: ("20:00:00", "evening"),
    39: ("20:00:01", None),
    44: ("21:55:00", None),
    50: ("06:30:00", None),
}

# Local weekday by hand: 2024-03-04 is a Monday.
WEEKDAYS = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]
WEEK1 = {"Monday": "early_week", "Tuesday": "early_week", "Wednesday": "mid_week", "Thursday": "mid_week",
         "Friday": "mid_week", "Saturday": "weekend", "Sunday": "weekend"}
WEEK2 = {d: ("weekend" if d in ("Saturday", "Sunday") else "weekday") for d in WEEKDAYS}

USERS = ["u01", "u02", "u03", "u04", "u05"]
# u04 logs sensors in UTC while notifications carry +05:30; u05 lives at -04:00.
NOTIFY_OFFSET = {"u01": 330, "u02": 330, "u03": 330, "u04": 330, "u05": -240}
SENSOR_OFFSET = {"u01": 330, "u02": 330, "u03": 330, "u04": 0, "u05": -240}

CONTEXTS = ["attending_lecture", "exercise", "relaxing", "in_vehicle", "cycling", "walking", "running",
            "studying", "eating", "standing"]
SOCIAL = ["alone", "with_someone_conversing", "with_someone_not_conversing"]
RESPONSES = ["yes", "no", "not_feasible", "missed"]
ARMS = ["breathing_exercise", "small_walk", "listening_to_music", "observe_surroundings", "funny_videos"]


def fmt(instant_utc, offset_min):
    local = instant_utc + dt.timedelta(minutes=offset_min)
    text = local.strftime("%Y-%m-%dT%H:%M:%S")
    if offset_min == 0:
        return text + "Z"
    sign = "+" if offset_min > 0 else "-"
    m = abs(offset_min)
    return f"{text}{sign}{m // 60:02d}:{m % 60:02d}"


def main():
    assert abs(distance_m(*MAIN_40N, 22.3020, 87.3010) - 40.0) < 0.01
    assert abs(distance_m(*HALL_49N, 22.2960, 87.2990) - 49.0) < 0.01
    assert abs(distance_m(*HALL_51N, 22.2960, 87.2990) - 51.0) < 0.01
    assert min(distance_m(*LAWN_60N, p[1], p[2]) for p in PLACES) > 55.0

    logs, expected = [], []
    used = {"battery": set(), "screen": set(), "activity": set(), "apps": set(), "calls": set(), "gps": set()}
    for k in range(100):
        user = USERS[k // 20]
        j = k % 20
        day, slot = j // 5, j % 5
        local_date = dt.date(2024, 3, 4) + dt.timedelta(days=2 * day + USERS.index(user))
        clock, bucket = OVERRIDES.get(k, (SLOTS[slot], SLOT_BUCKET[slot]))
        hh, mm, ss = (int(x) for x in clock.split(":"))
        noff = NOTIFY_OFFSET[user]
        local = dt.datetime(local_date.year, local_date.month, local_date.day, hh, mm, ss)
        t = local - dt.timedelta(minutes=noff)  # UTC instant, naive
        weekday = WEEKDAYS[local_date.weekday()]
        soff = SENSOR_OFFSET[user]

        def at(sec):
            return fmt(t + dt.timedelta(seconds=sec), soff)

        bi, si, ai = k % len(BATTERY), (k * 3) % len(SCREEN), (k * 5) % len(ACTIVITY)
        pi, ci, gi = (k * 7) % len(APPS), (k * 11) % len(CALLS), (k * 13) % len(GPS)
        for key, idx in (("battery", bi), ("screen", si), ("activity", ai), ("apps", pi), ("calls", ci), ("gps", gi)):
            used[key].add(idx)

        recs, (blevel, bstatus, bsave) = BATTERY[bi]
        for off, level, status, save in recs:
            logs.append({"stream": "battery", "user": user, "ts": at(off), "status": status, "level": level,
                         "voltage": 3900, "temperature": 31.5, "power_saving": save})
        recs, (son, sunl) = SCREEN[si]
        for off, on, unl in recs:
            logs.append({"stream": "screen", "user": user, "ts": at(off), "screen_on": on, "unlocked": unl})
        recs, act = ACTIVITY[ai]
        for off, label in recs:
            logs.append({"stream": "activity", "user": user, "ts": at(off), "label": label, "confidence": 90})
        recs, app = APPS[pi]
        for off, pkg in recs:
            logs.append({"stream": "app_usage", "user": user, "ts": at(off), "package": pkg, "foreground_ms": 60000})
        recs, call = CALLS[ci]
        for n, (start, end) in enumerate(recs):
            logs.append({"stream": "call", "user": user, "ts": at(start), "start_ts": at(start), "end_ts": at(end),
                         "type": "incoming", "status": "answered", "hashed_number": f"h{k:03d}{n}"})
        recs, loc = GPS[gi]
        for off, lat, lon in recs:
            logs.append({"stream": "gps", "user": user, "ts": at(off), "lat": round(lat, 8), "lon": round(lon, 8),
                         "alt": 78.0})

        response = RESPONSES[k % 4]
        notified = fmt(t, noff)
        responded = None if response == "missed" else fmt(t + dt.timedelta(seconds=90), noff)
        ctx, soc = CONTEXTS[k % 10], SOCIAL[k % 3]
        arm = ARMS[k % 5]
        logs.append({"stream": "notification", "user": user, "ts": notified, "notified_at": notified,
                     "responded_at": responded, "response": response, "activity_context": ctx,
                     "social_context": soc, "arm": arm})
        expected.append({
            "case": k, "user": user, "notified_at": notified, "responded_at": responded, "response": response,
            "activity_context": ctx, "social_context": soc, "arm": arm,
            "time_of_day": bucket, "day_of_week": weekday, "week_cat_1": WEEK1[weekday], "week_cat_2": WEEK2[weekday],
            "battery_level_cat": blevel, "battery_status": bstatus, "power_saving": bsave,
            "screen_on": son, "unlocked": sunl, "activity_label": act, "app_category": app,
            "on_call": call, "location_category": loc,
        })

    for key, table in (("battery", BATTERY), ("screen", SCREEN), ("activity", ACTIVITY), ("apps", APPS),
                       ("calls", CALLS), ("gps", GPS)):
        assert used[key] == set(range(len(table))), f"{key} cases not all exercised"

    # Malformed lines that must be rejected, and one exact repeat that must be ignored.
    bad = [
        {"stream": "battery", "user": "u01", "ts": "2024-03-04T09:00:00+05:30", "status": "Charging", "level": 140},
        {"stream": "gps", "user": "u02", "ts": "2024-03-05T09:00:00+05:30", "lat": 200.0, "lon": 87.3},
        {"stream": "screen", "user": "u03", "ts": "2024-03-06 9am", "screen_on": True, "unlocked": True},
        {"stream": "notification", "user": "u01", "ts": "2024-03-04T09:10:00+05:30",
         "notified_at": "2024-03-04T09:10:00+05:30", "responded_at": "2024-03-04T09:00:00+05:30",
         "response": "yes"},
    ]
    logs = logs[:40] + bad[:2] + logs[40:] + bad[2:] + [logs[0]]

    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "logs.jsonl", "w") as f:
        for rec in logs:
            f.write(json.dumps(rec) + "\n")
    # Rows come out ordered by user, then notification instant.
    expected.sort(key=lambda r: (r["user"], r["case"]))
    with open(OUT / "expected.jsonl", "w") as f:
        for rec in expected:
            f.write(json.dumps(rec) + "\n")
    with open(OUT / "places.jsonl", "w") as f:
        f.write(json.dumps({"type": "campus", "polygon": CAMPUS}) + "\n")
        for name, lat, lon, cat in PLACES:
            f.write(json.dumps({"type": "place", "name": name, "lat": lat, "lon": lon, "category": cat}) + "\n")
    print(f"{len(expected)} notifications, {len(logs)} log lines")


if __name__ == "__main__":
    main()
