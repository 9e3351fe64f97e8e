#!/usr/bin/env python3
"""Regenerates the simulated-app fixture corpus.

Each app directory gets manifest.xml, app.spec and traces/*.json. Run from
any directory; output goes next to this script. Only the standard library
is used.
"""

import json
import os
import shutil

ROOT = os.path.dirname(os.path.abspath(__file__))

VIEW = "android.intent.action.VIEW"
MAIN = "android.intent.action.MAIN"
LAUNCHER = "android.intent.category.LAUNCHER"
DEFAULT = "android.intent.category.DEFAULT"
BROWSABLE = "android.intent.category.BROWSABLE"


# GUI trees -----------------------------------------------------------------

def node(id, cls, actions=(), children=(), text=None):
    n = {"id": id, "class": cls}
    if text is not None:
        n["text"] = text
    n["actions"] = list(actions)
    n["children"] = list(children)
    return n


def button(id, *actions, text=None):
    return node(id, "android.widget.Button", actions or ("tap",), text=text)


def label(id, text=None):
    return node(id, "android.widget.TextView", text=text)


def field(id):
    return node(id, "android.widget.EditText", ("text_input",))


def group(id, *children, cls="android.widget.LinearLayout", actions=()):
    return node(id, cls, actions, children)


def screen(*children):
    return node("root", "android.widget.FrameLayout", (), children)


# Effects and transitions ---------------------------------------------------

def go_state(s):
    return {"kind": "go_state", "state": s}


def go_activity(a, trace=None):
    e = {"kind": "go_activity", "activity": a}
    if trace:
        e["trace"] = trace
    return e


def set_global(key, value):
    return {"kind": "set_global", "key": key, "value": value}


def crash(stack_trace_id):
    return {"kind": "crash", "stack_trace_id": stack_trace_id}


NO_OP = {"kind": "no_op"}


def on(component, effect, method, action="tap"):
    return {
        "component": component,
        "action": action,
        "effect": effect,
        "methods": [method],
    }


def state(tree, *transitions):
    return {"tree": tree, "transitions": list(transitions)}


def activity(states, entry, **extra):
    a = {"states": states, "entry_state": entry}
    a.update(extra)
    return a


# Sender traces -------------------------------------------------------------

def lit(v):
    return {"lit": v}


def var(n):
    return {"var": n}


def call(method, *args):
    return {"kind": "call", "receiver_var": "i", "method": method, "args": list(args)}


def trace(sender, target, *calls):
    new = {"kind": "new_intent", "var": "i"}
    if target is not None:
        new["explicit_target"] = target
    stmts = [new] + list(calls) + [call("start_activity")]
    return {"sender_activity": sender, "statements": stmts}


# Manifest ------------------------------------------------------------------

def manifest_xml(package, activities, permissions=()):
    """activities: list of (name, exported, filters); a filter is
    (actions, categories, data) with data a list of attribute dicts."""
    out = ['<?xml version="1.0" encoding="utf-8"?>',
           '<manifest xmlns:android="http://schemas.android.com/apk/res/android" '
           f'package="{package}">']
    for p in permissions:
        out.append(f'    <uses-permission android:name="{p}" />')
    out.append('    <application android:label="@string/app_name">')
    for name, exported, filters in activities:
        ex = "true" if exported else "false"
        if not filters:
            out.append(f'        <activity android:name="{name}" android:exported="{ex}" />')
            continue
        out.append(f'        <activity android:name="{name}" android:exported="{ex}">')
        for actions, categories, data in filters:
            out.append('            <intent-filter>')
            for a in actions:
                out.append(f'                <action android:name="{a}" />')
            for c in categories:
                out.append(f'                <category android:name="{c}" />')
            for d in data:
                attrs = " ".join(f'android:{k}="{v}"' for k, v in d.items())
                out.append(f'                <data {attrs} />')
            out.append('            </intent-filter>')
        out.append('        </activity>')
    out.append('    </application>')
    out.append('</manifest>')
    return "\n".join(out) + "\n"


LAUNCH_FILTER = ([MAIN], [LAUNCHER], [])


def write_app(name, package, manifest_acts, spec, traces, permissions=()):
    d = os.path.join(ROOT, name)
    if os.path.isdir(d):
        shutil.rmtree(d)
    os.makedirs(os.path.join(d, "traces"))
    with open(os.path.join(d, "manifest.xml"), "w") as f:
        f.write(manifest_xml(package, manifest_acts, permissions))
    with open(os.path.join(d, "app.spec"), "w") as f:
        json.dump(spec, f, indent=2)
        f.write("\n")
    for tid, t in traces.items():
        with open(os.path.join(d, "traces", tid + ".json"), "w") as f:
            json.dump(t, f, indent=2)
            f.write("\n")
    if not traces:
        # Keep the empty directory under version control.
        open(os.path.join(d, "traces", ".gitkeep"), "w").close()


def spec(initial, activities, globals_init=None):
    return {
        "manifest_file": "manifest.xml",
        "traces_dir": "traces",
        "initial_activity": initial,
        "globals_init": globals_init or {},
        "activities": activities,
    }


# Apps ----------------------------------------------------------------------

def loseweight():
    p = "com.lose.weight"
    main, settings, voice, unit, intro = (
        f"{p}.MainActivity", f"{p}.SettingsActivity", f"{p}.VoiceActivity",
        f"{p}.UnitActivity", f"{p}.MyTrainingActionIntroActivity")

    def tabs():
        return group("tabs", button("tab_home"), button("tab_plan"), button("tab_settings"))

    main_spec = activity({
        "home": state(
            screen(tabs(), group("cards", button("card_abs"), button("card_legs"),
                                 cls="androidx.recyclerview.widget.RecyclerView")),
            on("tab_plan", go_state("plan"), "MainActivity.showPlan"),
            on("tab_settings", go_activity(settings, "main_to_settings"), "MainActivity.openSettings"),
            on("card_abs", NO_OP, "MainActivity.previewWorkout"),
            on("card_legs", NO_OP, "MainActivity.previewWorkout"),
        ),
        "plan": state(
            screen(group("plan", label("week"), label("day"), button("plan_day")), tabs()),
            on("tab_home", go_state("home"), "MainActivity.showHome"),
            on("tab_settings", go_activity(settings, "main_to_settings"), "MainActivity.openSettings"),
            on("plan_day", NO_OP, "MainActivity.editPlan"),
        ),
    }, "home", entry_methods=["MainActivity.onCreate"])

    # The voice entry sits at the bottom of a long settings list: six swipes
    # in a row, and any other gesture scrolls back to the top.
    depth = 6
    states = {}
    for k in range(depth + 1):
        rows = [label(f"row{j}") for j in range(k + 3)]
        lst = group("list", *rows, cls="android.widget.ListView",
                    actions=("tap", "swipe", "long_press"))
        children = [group("header", button("ad")), lst]
        trans = []
        if k < depth:
            trans.append(on("list", go_state(f"s{k + 1}"), f"SettingsActivity.scroll{k + 1}", "swipe"))
        if k > 0:
            trans.append(on("list", go_state("s0"), "SettingsActivity.resetScroll"))
            trans.append(on("list", go_state("s0"), "SettingsActivity.resetScroll", "long_press"))
            trans.append(on("ad", go_state("s0"), "SettingsActivity.resetScroll"))
        else:
            children.append(button("unit_item"))
            children.append(button("reminder"))
            trans.append(on("unit_item", go_activity(unit, "settings_to_unit"), "SettingsActivity.openUnit"))
            trans.append(on("reminder", NO_OP, "SettingsActivity.toggleReminder"))
            trans.append(on("ad", NO_OP, "SettingsActivity.showAd"))
        if k == depth:
            children.append(button("voice_item", text="Voice Options (TTS)"))
            trans.append(on("voice_item", go_activity(voice, "settings_to_voice"), "SettingsActivity.openVoice"))
        states[f"s{k}"] = state(screen(*children), *trans)
    settings_spec = activity(states, "s0", entry_methods=["SettingsActivity.onCreate"])

    voice_spec = activity({
        "main": state(
            screen(button("tts_engine"), button("test_voice"), button("intro")),
            on("tts_engine", NO_OP, "VoiceActivity.selectEngine"),
            on("test_voice", NO_OP, "VoiceActivity.speak"),
            on("intro", go_activity(intro, "voice_to_intro"), "VoiceActivity.openIntro"),
        ),
    }, "main", required_extras={"voice_mode": "tts"},
        entry_methods=["VoiceActivity.onCreate"])

    unit_spec = activity({
        "main": state(
            screen(group("units", button("kg"), button("lb", "tap", "long_press"),
                         cls="android.widget.RadioGroup")),
            on("kg", NO_OP, "UnitActivity.setMetric"),
            on("lb", NO_OP, "UnitActivity.setImperial"),
            on("lb", crash("java.lang.NumberFormatException@UnitActivity.convertWeight"),
               "UnitActivity.convertWeight", "long_press"),
        ),
    }, "main", entry_methods=["UnitActivity.onCreate"])

    intro_spec = activity({
        "main": state(
            screen(node("video", "android.widget.VideoView", ("swipe",)), button("start")),
            on("video", NO_OP, "MyTrainingActionIntroActivity.seek", "swipe"),
            on("start", NO_OP, "MyTrainingActionIntroActivity.startAction"),
        ),
    }, "main", required_extras={"action_id": 12},
        entry_methods=["MyTrainingActionIntroActivity.onCreate"])

    traces = {
        "main_to_settings": trace(main, settings),
        "settings_to_unit": trace(settings, unit),
        "settings_to_voice": trace(settings, voice,
                                   call("put_extra_primary", lit("voice_mode"), lit("tts"))),
        "voice_to_intro": trace(voice, intro,
                                call("put_extra_primary", lit("action_id"), lit(12))),
    }
    write_app("loseweight", p, [
        (main, True, [LAUNCH_FILTER]),
        (settings, False, []),
        (voice, False, []),
        (unit, False, []),
        (intro, False, []),
    ], spec(main, {main: main_spec, settings: settings_spec, voice: voice_spec,
                   unit: unit_spec, intro: intro_spec}), traces)


def alltrails():
    p = "com.alltrails.alltrails"
    home, nav, saved, auth, cal = (
        f"{p}.ui.HomeActivity", f"{p}.ui.NavigationActivity", f"{p}.ui.SavedActivity",
        f"{p}.ui.AuthActivity", f"{p}.ui.CalorieInfoActivity")

    def bottom():
        return group("bottom_nav", button("nav_navigate"), button("nav_profile"))

    home_states = {
        "explore": state(
            screen(field("search"), node("map", "com.mapbox.MapView", ("swipe",)), bottom()),
            on("search", NO_OP, "HomeActivity.search", "text_input"),
            on("map", go_state("map"), "HomeActivity.panMap", "swipe"),
            on("nav_navigate", go_activity(nav, "home_to_navigation"), "HomeActivity.openNavigation"),
            on("nav_profile", go_state("profile0"), "HomeActivity.openProfile"),
        ),
        "map": state(
            screen(node("map", "com.mapbox.MapView", ("swipe",)), button("list_view"), bottom()),
            on("list_view", go_state("explore"), "HomeActivity.showList"),
            on("nav_navigate", go_activity(nav, "home_to_navigation"), "HomeActivity.openNavigation"),
            on("nav_profile", go_state("profile0"), "HomeActivity.openProfile"),
        ),
    }
    # Saved lists hide a few menus deep in the profile tab; a stray tap
    # closes the menus.
    depth = 3
    for k in range(depth + 1):
        rows = [label(f"row{j}") for j in range(k + 2)]
        children = [group("menu", *rows, button("next")), button("close"), button("share")]
        trans = [
            on("close", go_state("explore"), "HomeActivity.closeProfile"),
            on("share", go_state("explore"), "HomeActivity.shareProfile"),
        ]
        if k < depth:
            trans.append(on("next", go_state(f"profile{k + 1}"), f"HomeActivity.profileMenu{k + 1}"))
        else:
            trans.append(on("next", go_activity(saved, "home_to_saved"), "HomeActivity.openSaved"))
        home_states[f"profile{k}"] = state(screen(*children), *trans)
    home_spec = activity(home_states, "explore", entry_methods=["HomeActivity.onCreate"])

    nav_spec = activity({
        "idle": state(
            screen(button("start"), button("layers")),
            on("start", go_state("recording"), "NavigationActivity.startRecording"),
            on("layers", NO_OP, "NavigationActivity.toggleLayers"),
        ),
        "recording": state(
            screen(group("hud", label("distance"), label("pace")), button("stop")),
            on("stop", go_state("idle"), "NavigationActivity.stopRecording"),
        ),
    }, "idle", entry_methods=["NavigationActivity.onCreate"])

    # Saved trails are only shown to signed-in users.
    saved_spec = activity({
        "list": state(
            screen(button("sort"), group("trails", button("trail_item"),
                                         cls="androidx.recyclerview.widget.RecyclerView")),
            on("sort", NO_OP, "SavedActivity.sort"),
            on("trail_item", go_activity(cal, "saved_to_calorie"), "SavedActivity.openTrail"),
        ),
    }, "list", required_globals={"logged_in": True},
        entry_methods=["SavedActivity.onCreate"])

    auth_spec = activity({
        "form": state(
            screen(field("email"), field("password"), button("login")),
            on("email", NO_OP, "AuthActivity.editEmail", "text_input"),
            on("password", NO_OP, "AuthActivity.editPassword", "text_input"),
            on("login", set_global("logged_in", True), "AuthActivity.login"),
        ),
    }, "form", entry_methods=["AuthActivity.onCreate"])

    cal_spec = activity({
        "main": state(
            screen(node("chart", "com.github.mikephil.charting.charts.LineChart", ("swipe",))),
            on("chart", NO_OP, "CalorieInfoActivity.scrollChart", "swipe"),
        ),
    }, "main", required_extras={"trail_id": 101},
        entry_methods=["CalorieInfoActivity.onCreate"])

    traces = {
        "home_to_navigation": trace(home, nav),
        "home_to_saved": trace(home, saved),
        # Sent from a session-expiry callback; no widget leads here.
        "home_to_auth": trace(home, auth,
                              call("put_extra_primary", lit("reason"), lit("session_expired"))),
        "saved_to_calorie": trace(saved, cal,
                                  call("put_extra_primary", lit("trail_id"), lit(101))),
    }
    write_app("alltrails", p, [
        (home, True, [LAUNCH_FILTER,
                      ([VIEW], [BROWSABLE, DEFAULT],
                       [{"scheme": "https", "host": "www.alltrails.com", "path": "explore"}])]),
        (nav, False, []),
        (saved, False, []),
        (auth, False, []),
        (cal, False, []),
    ], spec(home, {home: home_spec, nav: nav_spec, saved: saved_spec, auth: auth_spec,
                   cal: cal_spec}, {"logged_in": False}), traces,
        permissions=["android.permission.ACCESS_FINE_LOCATION"])


def ezfile():
    p = "com.ezfile"
    home, browser, settings, exerr, report = (
        f"{p}.HomeActivity", f"{p}.FileBrowserActivity", f"{p}.SettingsActivity",
        f"{p}.ExErrorActivity", f"{p}.ExErrorReportActivity")

    home_spec = activity({
        "grid": state(
            screen(field("search"), group("shortcuts", button("browse"), button("settings"),
                                          cls="android.widget.GridView", actions=("swipe",))),
            on("search", NO_OP, "HomeActivity.search", "text_input"),
            on("shortcuts", NO_OP, "HomeActivity.scrollShortcuts", "swipe"),
            on("browse", go_activity(browser, "home_to_browser"), "HomeActivity.openBrowser"),
            on("settings", go_activity(settings, "home_to_settings"), "HomeActivity.openSettings"),
        ),
    }, "grid", entry_methods=["HomeActivity.onCreate"])

    browser_spec = activity({
        "root": state(
            screen(button("folder"), button("file", "tap", "long_press")),
            on("folder", go_state("folder"), "FileBrowserActivity.enterFolder"),
            on("file", NO_OP, "FileBrowserActivity.selectFile"),
            on("file", crash("java.io.FileNotFoundException@FileBrowserActivity.openFile"),
               "FileBrowserActivity.openFile", "long_press"),
        ),
        "folder": state(
            screen(group("path", label("crumb")), button("up"), button("file2")),
            on("up", go_state("root"), "FileBrowserActivity.goUp"),
            on("file2", NO_OP, "FileBrowserActivity.selectFile"),
        ),
    }, "root", required_extras={"path": "/sdcard"},
        entry_methods=["FileBrowserActivity.onCreate"])

    settings_spec = activity({
        "main": state(
            screen(button("theme"), button("cache"), button("about")),
            on("theme", NO_OP, "SettingsActivity.toggleTheme"),
            on("cache", NO_OP, "SettingsActivity.clearCache"),
            on("about", NO_OP, "SettingsActivity.showAbout"),
        ),
    }, "main", entry_methods=["SettingsActivity.onCreate"])

    # Opened by the uncaught-exception handler, never by a widget.
    exerr_spec = activity({
        "main": state(
            screen(label("message"), button("report"), button("dismiss")),
            on("report", go_activity(report, "exerror_to_report"), "ExErrorActivity.openReport"),
            on("dismiss", NO_OP, "ExErrorActivity.dismiss"),
        ),
    }, "main", required_extras={"extra_key": "other"},
        on_context_fault={"kind": "fault_crash",
                          "stack_trace_id": "java.lang.NullPointerException@ExErrorActivity.onCreate"},
        entry_methods=["ExErrorActivity.onCreate"])

    report_spec = activity({
        "main": state(
            screen(field("comment"), button("send")),
            on("comment", NO_OP, "ExErrorReportActivity.editComment", "text_input"),
            on("send", NO_OP, "ExErrorReportActivity.send"),
        ),
    }, "main", required_extras={"error_id": 5},
        entry_methods=["ExErrorReportActivity.onCreate"])

    traces = {
        "home_to_browser": trace(home, browser,
                                 call("put_extra_primary", lit("path"), lit("/sdcard"))),
        "home_to_settings": trace(home, settings),
        "settings_to_exerror": trace(settings, exerr,
                                     call("put_extra_primary", lit("extra_key"), lit("other"))),
        "exerror_to_report": trace(exerr, report,
                                   call("put_extra_primary", lit("error_id"), lit(5))),
    }
    write_app("ezfile", p, [
        (home, True, [LAUNCH_FILTER]),
        (browser, False, []),
        (settings, False, []),
        (exerr, False, []),
        (report, False, []),
    ], spec(home, {home: home_spec, browser: browser_spec, settings: settings_spec,
                   exerr: exerr_spec, report: report_spec}), traces,
        permissions=["android.permission.READ_EXTERNAL_STORAGE"])


def fp_trap():
    p = "com.fptrap"
    main, login, dash, profile = (
        f"{p}.MainActivity", f"{p}.LoginActivity", f"{p}.DashboardActivity",
        f"{p}.ProfileActivity")

    main_spec = activity({
        "main": state(
            screen(button("login"), button("help")),
            on("login", go_activity(login, "main_to_login"), "MainActivity.openLogin"),
            on("help", NO_OP, "MainActivity.showHelp"),
        ),
    }, "main", entry_methods=["MainActivity.onCreate"])

    login_spec = activity({
        "form": state(
            screen(field("user"), button("submit")),
            on("user", NO_OP, "LoginActivity.editUser", "text_input"),
            on("submit", go_activity(dash, "login_to_dashboard"), "LoginActivity.submit"),
        ),
    }, "form", entry_methods=["LoginActivity.onCreate"])

    dash_spec = activity({
        "main": state(
            screen(group("cards", button("profile"), button("sync"))),
            on("profile", go_activity(profile, "dashboard_to_profile"), "DashboardActivity.openProfile"),
            on("sync", crash("java.lang.IllegalStateException@DashboardActivity.sync"),
               "DashboardActivity.sync"),
        ),
    }, "main", on_enter=[{"op": "set", "key": "logged_in", "value": True}],
        entry_methods=["DashboardActivity.onCreate"])

    # Dereferences the session without checking it.
    profile_spec = activity({
        "main": state(
            screen(label("name"), button("edit")),
            on("edit", NO_OP, "ProfileActivity.edit"),
        ),
    }, "main", required_globals={"logged_in": True},
        on_context_fault={"kind": "fault_crash",
                          "stack_trace_id": "java.lang.NullPointerException@ProfileActivity.onCreate"},
        entry_methods=["ProfileActivity.onCreate"])

    traces = {
        "main_to_login": trace(main, login),
        "login_to_dashboard": trace(login, dash),
        "dashboard_to_profile": trace(dash, profile),
        # Notification tap handler: opens the profile directly.
        "main_to_profile": trace(main, profile),
    }
    write_app("fp_trap", p, [
        (main, True, [LAUNCH_FILTER]),
        (login, False, []),
        (dash, False, []),
        (profile, False, []),
    ], spec(main, {main: main_spec, login: login_spec, dash: dash_spec,
                   profile: profile_spec}, {"logged_in": False}), traces)


def oscillator():
    p = "com.osc"
    osc = f"{p}.OscActivity"
    osc_spec = activity({
        "a": state(screen(button("toggle")),
                   on("toggle", go_state("b"), "OscActivity.toB")),
        "b": state(screen(group("panel", button("toggle"))),
                   on("toggle", go_state("a"), "OscActivity.toA")),
    }, "a", entry_methods=["OscActivity.onCreate"])
    write_app("oscillator", p, [(osc, True, [LAUNCH_FILTER])],
              spec(osc, {osc: osc_spec}), {})


def intentbench_mini():
    p = "com.intentbench"
    A = lambda n: f"{p}.{n}Activity"
    main = A("Main")
    names = ["Attr", "Primary", "ObjectConst", "ObjectDynamic", "Bundle", "Basic", "Device",
             "Hub1", "StackTarget1", "Hub2", "StackTarget2", "Sync", "Terms", "Theme"]
    acts = {}

    def simple(name, cases=(), **extra):
        acts[A(name)] = activity({
            "main": state(screen(label("body"), button("ok")),
                          on("ok", NO_OP, f"{name}Activity.onOk")),
        }, "main", cases=list(cases), entry_methods=[f"{name}Activity.onCreate"], **extra)

    def case(id, category, **checks):
        c = {"id": id, "category": category}
        c.update(checks)
        return c

    acts[main] = activity({
        "home": state(
            screen(group("menu", button("hub1"), button("hub2"), button("sync"), button("terms")),
                   group("prefs", button("enable_sync"), button("accept_terms"))),
            on("hub1", go_activity(A("Hub1"), "main_to_hub1"), "MainActivity.openHub1"),
            on("hub2", go_activity(A("Hub2"), "main_to_hub2"), "MainActivity.openHub2"),
            on("sync", go_activity(A("Sync"), "main_to_sync"), "MainActivity.openSync"),
            on("terms", go_activity(A("Terms"), "main_to_terms"), "MainActivity.openTerms"),
            on("enable_sync", set_global("sync_enabled", True), "MainActivity.enableSync"),
            on("accept_terms", set_global("terms_accepted", True), "MainActivity.acceptTerms"),
        ),
    }, "home", entry_methods=["MainActivity.onCreate"])

    simple("Attr", [
        case("attr_action_data", "attribute",
             attributes={"action": f"{p}.action.SHOW", "data": "ib://item/42"}),
        case("attr_type_flags", "attribute",
             attributes={"type": "text/plain", "flags": 268435456}),
    ])
    simple("Primary", [
        case("primary_int", "primary_extra", extras={"user_id": 42}),
        case("primary_str", "primary_extra", extras={"title": "hello"}),
    ], required_extras={"user_id": 42})
    simple("ObjectConst", [
        case("object_const", "object_extra", extras={"profile.name": "ann", "profile.age": 30}),
    ])
    simple("ObjectDynamic", [
        case("object_dynamic", "object_extra",
             extras={"order.id": 7, "order.shipping": "express"}),
    ], required_extras={"order.id": 7})
    simple("Bundle", [
        case("bundle_page", "bundle_extra", extras={"args.page": 3}),
        case("bundle_mode", "bundle_extra", extras={"args.mode": "dark"}),
    ])
    simple("Basic", [
        case("basic_action_extra", "basic_extra",
             attributes={"action": f"{p}.action.OPEN"}, extras={"doc_id": 7}),
        case("basic_action_bundle", "basic_extra",
             attributes={"action": f"{p}.action.OPEN"}, extras={"opts.readonly": True}),
    ])
    simple("Device", [
        case("device_camera", "device_config", device=["android.permission.CAMERA"]),
        case("device_location", "device_config", device=["android.permission.ACCESS_FINE_LOCATION"]),
    ], device_config=["android.permission.CAMERA", "android.permission.ACCESS_FINE_LOCATION"])

    for i in (1, 2):
        hub, target = A(f"Hub{i}"), A(f"StackTarget{i}")
        flag = f"hub{i}_created"
        acts[hub] = activity({
            "main": state(
                screen(group("list", label("item")), button("open_target"), button("refresh")),
                on("open_target", go_activity(target, f"hub{i}_to_target"), f"Hub{i}Activity.openTarget"),
                on("refresh", NO_OP, f"Hub{i}Activity.refresh"),
            ),
        }, "main", on_enter=[{"op": "set", "key": flag, "value": True}],
            entry_methods=[f"Hub{i}Activity.onCreate"])
        simple(f"StackTarget{i}", [
            case(f"stack_after_hub{i}", "activity_stack", globals={flag: True}),
        ], required_globals={flag: True})

    simple("Sync", [case("global_sync", "global_data", globals={"sync_enabled": True})],
           required_globals={"sync_enabled": True})
    simple("Terms", [case("global_terms", "global_data", globals={"terms_accepted": True})],
           required_globals={"terms_accepted": True})
    simple("Theme", [case("global_theme", "global_data", globals={"theme": "light"})],
           required_globals={"theme": "light"})

    traces = {
        "main_to_attr": trace(main, None,
                              call("set_action", lit(f"{p}.action.SHOW")),
                              call("set_data", lit("ib://item/42")),
                              call("set_type", lit("text/plain")),
                              call("set_flags", lit(268435456)),
                              call("set_class_name", lit(p), lit(A("Attr")))),
        "main_to_primary": {
            "sender_activity": main,
            "statements": [
                {"kind": "const_assign", "var": "uid", "value": 42},
                {"kind": "new_intent", "var": "i", "explicit_target": A("Primary")},
                call("put_extra_primary", lit("user_id"), var("uid")),
                call("put_extra_primary", lit("title"), lit("hello")),
                call("start_activity"),
            ],
        },
        "main_to_object_const": trace(main, A("ObjectConst"),
                                      call("put_extra_object", lit("profile"),
                                           lit("name"), lit("ann"), lit("age"), lit(30))),
        "main_to_object_dynamic": {
            "sender_activity": main,
            "statements": [
                {"kind": "branch_join", "var": "ship", "values": ["express", "standard"]},
                {"kind": "new_intent", "var": "i", "explicit_target": A("ObjectDynamic")},
                call("put_extra_object", lit("order"), lit("id"), lit(7),
                     lit("shipping"), var("ship")),
                call("start_activity"),
            ],
        },
        "main_to_bundle": trace(main, A("Bundle"),
                                call("put_extra_bundle", lit("args"),
                                     lit("page"), lit(3), lit("mode"), lit("dark"))),
        "main_to_basic": trace(main, None,
                               call("set_action", lit(f"{p}.action.OPEN")),
                               call("put_extra_primary", lit("doc_id"), lit(7)),
                               call("put_extra_bundle", lit("opts"), lit("readonly"), lit(True))),
        "main_to_device": trace(main, A("Device")),
        "main_to_hub1": trace(main, A("Hub1")),
        "main_to_hub2": trace(main, A("Hub2")),
        "hub1_to_target": trace(A("Hub1"), A("StackTarget1")),
        "hub2_to_target": trace(A("Hub2"), A("StackTarget2")),
        "main_to_sync": trace(main, A("Sync")),
        "main_to_terms": trace(main, A("Terms")),
        "main_to_theme": trace(main, A("Theme")),
    }
    manifest_acts = [(main, True, [LAUNCH_FILTER])]
    for n in names:
        filters = []
        if n == "Basic":
            filters = [([f"{p}.action.OPEN"], [DEFAULT], [])]
        manifest_acts.append((A(n), False, filters))
    write_app("intentbench_mini", p, manifest_acts,
              spec(main, acts, {"theme": "light"}), traces)


def amazon_prime():
    p = "com.amazon.avod.thirdpartyclient"
    xml = manifest_xml(p, [
        (f"{p}.HomeScreenActivity", True, [
            ([VIEW], [DEFAULT, BROWSABLE],
             [{"scheme": "https", "host": "www.primevideo.com", "path": "storefront"}]),
            ([VIEW], [DEFAULT, BROWSABLE],
             [{"scheme": "aiv", "host": "detail"}]),
        ]),
        ("com.amazon.avod.settings.ContactUsSettings", False, []),
    ], permissions=["android.permission.INTERNET"])
    d = os.path.join(ROOT, "manifests")
    os.makedirs(d, exist_ok=True)
    with open(os.path.join(d, "amazon_prime.xml"), "w") as f:
        f.write(xml)


if __name__ == "__main__":
    loseweight()
    alltrails()
    ezfile()
    fp_trap()
    oscillator()
    intentbench_mini()
    amazon_prime()
