//! Small hand-built traces modelled on a weather app that lost its location
//! updates after the runtime-permission change of API 23.
//!
//! [`goodweather_pair`] is shaped so that, with the default weights,
//! `MainActivity.gpsRequestLocation` scores 0.72 and
//! `MainActivity.onOptionsItemSelected` 0.69: the tree is 7 levels high,
//! the four retained blocks weigh 13 in total, 4 of which sit under
//! `gpsRequestLocation` (depth 6) and 8 under `onOptionsItemSelected`
//! (depth 5).

use crate::trace::{FrameworkPrefixes, ReturnValue, Trace, TraceBuilder, TraceLabel, DEFAULT_ROOT};

pub const APP: &str = "org.asdtm.goodweather";
pub const GPS_REQUEST_LOCATION: &str = "org.asdtm.goodweather.MainActivity.gpsRequestLocation";
pub const ON_OPTIONS_ITEM_SELECTED: &str = "org.asdtm.goodweather.MainActivity.onOptionsItemSelected";
pub const ON_LOCATION_CHANGED: &str = "org.asdtm.goodweather.MainActivity$1.onLocationChanged";
pub const ON_CREATE: &str = "org.asdtm.goodweather.MainActivity.onCreate";

const ACTIVITY_THREAD: &str = "android.app.ActivityThread.main";
const LOOPER: &str = "android.os.Looper.loop";
const HANDLER: &str = "android.os.Handler.dispatchMessage";
const LAUNCH: &str = "android.app.ActivityThread.performLaunchActivity";
const MENU: &str = "android.app.Activity.onMenuItemSelected";
const LISTENER: &str = "android.location.LocationManager$ListenerTransport._handleMessage";
const COMPAT: &str = "android.support.v7.app.AppCompatActivity";

fn stack<'a>(frames: &[&'a str]) -> Vec<&'a str> {
    let mut s = vec![DEFAULT_ROOT];
    s.extend_from_slice(frames);
    s
}

/// The activity start-up excerpt: one callback enclosing five API calls,
/// twelve events in total.
fn on_create(b: &mut TraceBuilder) {
    let outer = [ACTIVITY_THREAD, LOOPER, HANDLER, LAUNCH, ON_CREATE];
    let inner = |m: &str| {
        let mut s: Vec<String> = stack(&outer).into_iter().map(String::from).collect();
        s.push(format!("{COMPAT}.{m}"));
        s
    };
    b.begin(&stack(&outer)).unwrap();
    b.call(&inner("onCreate"), None).unwrap();
    b.call(
        &inner("getSupportActionBar"),
        Some(ReturnValue::dynamic_type("android.support.v7.app.WindowDecorActionBar")),
    )
    .unwrap();
    b.call(&inner("setContentView"), None).unwrap();
    b.call(
        &inner("findViewById"),
        Some(ReturnValue::to_string_repr(
            "android.support.v7.widget.Toolbar{2f5a1c3 V.E...... ......I. 0,0-0,0 #7f0d0089 app:id/toolbar}",
        )),
    )
    .unwrap();
    b.call(&inner("setSupportActionBar"), None).unwrap();
    b.end(ON_CREATE, None).unwrap();
}

/// Twelve-event baseline excerpt of the activity start-up; only the
/// `MainActivity.onCreate` begin/end pair is a callback.
pub fn startup_excerpt() -> Trace {
    let mut b = TraceBuilder::new(FrameworkPrefixes::default());
    on_create(&mut b);
    b.finish(TraceLabel::Baseline)
}

fn noise(b: &mut TraceBuilder, millis: u64) {
    let s = stack(&[ACTIVITY_THREAD, LOOPER, HANDLER, "android.os.SystemClock.uptimeMillis"]);
    b.call(&s, Some(ReturnValue::primitive(millis.to_string()))).unwrap();
}

/// Baseline and failure traces of the refresh scenario.
///
/// The failure trace contains four blocks of weight at least 2 (two under
/// `gpsRequestLocation`, one under `onOptionsItemSelected`, one
/// `onLocationChanged` callback) and two weight-1 clock reads.
pub fn goodweather_pair() -> (Trace, Trace) {
    let prefixes = FrameworkPrefixes::default();
    let mut base = TraceBuilder::new(prefixes.clone());
    let mut fail = TraceBuilder::new(prefixes);

    let menu = [ACTIVITY_THREAD, LOOPER, HANDLER, MENU, ON_OPTIONS_ITEM_SELECTED];
    let in_menu = |m: &'static str| {
        let mut s = stack(&menu);
        s.push(m);
        s
    };
    let in_gps = |m: &'static str| {
        let mut s = stack(&menu);
        s.push(GPS_REQUEST_LOCATION);
        s.push(m);
        s
    };

    for (b, failing) in [(&mut base, false), (&mut fail, true)] {
        on_create(b);
        if failing {
            noise(b, 81_234);
        }

        b.begin(&stack(&menu)).unwrap();
        b.call(
            &in_menu("android.view.MenuItem.getItemId"),
            Some(ReturnValue::primitive("2131624109")),
        )
        .unwrap();
        if failing {
            b.call(
                &in_menu("android.widget.Toast.makeText"),
                Some(ReturnValue::dynamic_type("android.widget.Toast")),
            )
            .unwrap();
            b.call(&in_menu("android.widget.Toast.show"), None).unwrap();
            b.call(&in_menu("android.app.ProgressDialog.setMessage"), None).unwrap();
            b.call(&in_menu("android.app.ProgressDialog.show"), None).unwrap();
        }
        b.call(&in_menu("android.app.Activity.invalidateOptionsMenu"), None)
            .unwrap();
        if failing {
            let check = "android.support.v4.content.ContextCompat.checkSelfPermission";
            b.call(&in_gps(check), Some(ReturnValue::primitive("-1"))).unwrap();
            b.call(&in_gps(check), Some(ReturnValue::primitive("-1"))).unwrap();
        }
        b.call(
            &in_gps("android.location.LocationManager.isProviderEnabled"),
            Some(ReturnValue::primitive("true")),
        )
        .unwrap();
        if failing {
            b.call(&in_gps("android.location.LocationManager.requestLocationUpdates"), None)
                .unwrap();
            b.call(
                &in_gps("android.location.LocationManager.getLastKnownLocation"),
                Some(ReturnValue::to_string_repr("null")),
            )
            .unwrap();
        }
        b.end(ON_OPTIONS_ITEM_SELECTED, None).unwrap();

        if failing {
            noise(b, 81_990);
        }

        let resume = [
            ACTIVITY_THREAD,
            LOOPER,
            HANDLER,
            "android.app.Activity.performResume",
            "org.asdtm.goodweather.MainActivity.onResume",
        ];
        b.begin(&stack(&resume)).unwrap();
        let mut s = stack(&resume);
        s.push("android.support.v7.app.AppCompatActivity.onResume");
        b.call(&s, None).unwrap();
        b.end("org.asdtm.goodweather.MainActivity.onResume", None).unwrap();

        if failing {
            let cb = [ACTIVITY_THREAD, LOOPER, LISTENER, ON_LOCATION_CHANGED];
            let inner = |m: &'static str| {
                let mut s = stack(&cb);
                s.push(m);
                s
            };
            b.begin(&stack(&cb)).unwrap();
            b.call(&inner("android.app.Dialog.cancel"), None).unwrap();
            b.call(
                &inner("android.location.Location.getLatitude"),
                Some(ReturnValue::primitive("45.5183")),
            )
            .unwrap();
            b.call(
                &inner("android.location.Location.getLongitude"),
                Some(ReturnValue::primitive("9.2129")),
            )
            .unwrap();
            b.call(
                &inner("android.content.Context.getSharedPreferences"),
                Some(ReturnValue::dynamic_type("android.app.SharedPreferencesImpl")),
            )
            .unwrap();
            b.end(ON_LOCATION_CHANGED, None).unwrap();
        }

        let pause = [
            ACTIVITY_THREAD,
            LOOPER,
            HANDLER,
            "android.app.Activity.performPause",
            "org.asdtm.goodweather.MainActivity.onPause",
        ];
        b.begin(&stack(&pause)).unwrap();
        b.end("org.asdtm.goodweather.MainActivity.onPause", None).unwrap();
    }

    (base.finish(TraceLabel::Baseline), fail.finish(TraceLabel::Failure))
}
