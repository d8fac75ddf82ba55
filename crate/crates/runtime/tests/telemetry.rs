use std::sync::Arc;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use serde_json::Value;
use skyfence_runtime::{bind, serve, CommandQueue, EngineConfig, Hub, VirtualRun};
use skyfence_simkit::Scenario;
use tokio_tungstenite::tungstenite::Message;

fn scenario() -> Scenario {
    let mut s = Scenario::new("telemetry", 3.0, 4);
    s.sensors.audio.enabled = false;
    s.sensors.fcam.enabled = false;
    s
}

/// Steps a virtual run on its own thread, one tick every 20 ms of wall time.
fn drive(hub: Arc<Hub>, ticks: usize) -> std::thread::JoinHandle<()> {
    std::thread::spawn(move || {
        let mut run = VirtualRun::new(scenario(), EngineConfig::default()).unwrap();
        for _ in 0..ticks {
            let cmds = hub.commands().drain();
            let Some(out) = run.step(cmds).unwrap() else { break };
            hub.publish(&out);
            std::thread::sleep(Duration::from_millis(20));
        }
    })
}

async fn next_json<S>(ws: &mut S) -> Value
where
    S: StreamExt<Item = Result<Message, tokio_tungstenite::tungstenite::Error>> + Unpin,
{
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(10), ws.next()).await.expect("frame in time").unwrap().unwrap();
        if let Message::Text(t) = msg {
            return serde_json::from_str(t.as_str()).unwrap();
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn snapshots_commands_and_errors() {
    let hub = Hub::new(Arc::new(CommandQueue::new(64)));
    let listener = bind(0).await.unwrap();
    let port = listener.local_addr().unwrap().port();
    tokio::spawn(serve(listener, hub.clone()));

    // one tick published before anyone connects
    let mut run = VirtualRun::new(scenario(), EngineConfig::default()).unwrap();
    hub.publish(&run.step(vec![]).unwrap().unwrap());

    let url = format!("ws://127.0.0.1:{port}/ws");
    let (mut a, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    let (mut b, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    let first = next_json(&mut a).await;
    assert_eq!(first["type"], "snapshot");
    assert_eq!(first["tick"], 1);
    assert_eq!(next_json(&mut b).await["type"], "snapshot");
    while hub.client_count() < 2 {
        tokio::time::sleep(Duration::from_millis(5)).await;
    }

    let driver = drive(hub.clone(), 25);

    a.send(Message::Text("{\"type\":\"set_fusion\",\"min_sensors\":1}".into())).await.unwrap();
    b.send(Message::Text("{\"type\":\"warp\"}".into())).await.unwrap();

    let mut ack = None;
    let mut echoed = false;
    let mut ticks_a = Vec::new();
    while ticks_a.len() < 15 {
        let v = next_json(&mut a).await;
        match v["type"].as_str().unwrap() {
            "snapshot" => {
                ticks_a.push(v.to_string());
                if ack.is_some() && v["fusion"]["min_sensors"] == 1 {
                    echoed = true;
                }
            }
            "ack" => ack = Some(v),
            other => panic!("unexpected {other}: {v}"),
        }
    }
    let ack = ack.expect("command acknowledged");
    assert_eq!(ack["command"]["type"], "set_fusion");
    assert!(echoed, "snapshot after the ack shows the new config");

    let mut error = None;
    let mut ticks_b = Vec::new();
    while ticks_b.len() < 15 {
        let v = next_json(&mut b).await;
        match v["type"].as_str().unwrap() {
            "snapshot" => ticks_b.push(v.to_string()),
            "error" => error = Some(v),
            other => panic!("unexpected {other}: {v}"),
        }
    }
    assert!(error.expect("malformed command answered")["message"].as_str().unwrap().contains("malformed"));
    assert_eq!(ticks_a, ticks_b, "both clients see the same stream");
    driver.join().unwrap();
}
