use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use worldforge_genloop::{ChatModel, ClientConfig, HttpChatModel, LlmErrorKind};

/// One-shot HTTP server: hands the request body to `tx` and answers with
/// `status` and `body` after `delay`.
fn serve(status: u16, body: &'static str, delay: Duration) -> (String, mpsc::Receiver<(String, String)>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut head = String::new();
        let mut len = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if line == "\r\n" || line.is_empty() {
                break;
            }
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
            head.push_str(&line);
        }
        let mut buf = vec![0; len];
        reader.read_exact(&mut buf).unwrap();
        let _ = tx.send((head, String::from_utf8(buf).unwrap()));
        thread::sleep(delay);
        let mut stream = stream;
        let _ = write!(
            stream,
            "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        );
    });
    (url, rx)
}

fn model(url: &str) -> HttpChatModel {
    HttpChatModel::with_key(ClientConfig::new(url, "test-model"), "sk-test").unwrap()
}

const OK: &str = r#"{"choices":[{"message":{"role":"assistant","content":"```\ngame \"g\" {}\n```"}}]}"#;

#[test]
fn returns_message_content_and_sends_config() {
    let (url, rx) = serve(200, OK, Duration::ZERO);
    let text = model(&url).complete("hello", Duration::from_secs(10)).unwrap();
    assert_eq!(text, "```\ngame \"g\" {}\n```");
    let (head, body) = rx.recv().unwrap();
    assert!(head.starts_with("POST /v1/chat/completions"));
    assert!(head.to_ascii_lowercase().contains("authorization: bearer sk-test"));
    let json: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(json["model"], "test-model");
    assert_eq!(json["temperature"], 0.0);
    assert_eq!(json["top_p"], 1.0);
    assert_eq!(json["messages"][0]["content"], "hello");
}

#[test]
fn unauthorized_is_auth() {
    let (url, _rx) = serve(401, r#"{"error":"bad key"}"#, Duration::ZERO);
    let err = model(&url).complete("hi", Duration::from_secs(10)).unwrap_err();
    assert_eq!(err.kind, LlmErrorKind::Auth);
}

#[test]
fn server_error_is_http() {
    let (url, _rx) = serve(500, "oops", Duration::ZERO);
    assert_eq!(model(&url).complete("hi", Duration::from_secs(10)).unwrap_err().kind, LlmErrorKind::Http);
}

#[test]
fn slow_server_times_out() {
    let (url, _rx) = serve(200, OK, Duration::from_secs(3));
    let err = model(&url).complete("hi", Duration::from_millis(300)).unwrap_err();
    assert_eq!(err.kind, LlmErrorKind::Timeout);
}

#[test]
fn garbage_is_malformed() {
    let (url, _rx) = serve(200, r#"{"choices":[]}"#, Duration::ZERO);
    assert_eq!(model(&url).complete("hi", Duration::from_secs(10)).unwrap_err().kind, LlmErrorKind::Malformed);
    let (url, _rx) = serve(200, "not json", Duration::ZERO);
    assert_eq!(model(&url).complete("hi", Duration::from_secs(10)).unwrap_err().kind, LlmErrorKind::Malformed);
}

#[test]
fn missing_key_variable_is_auth() {
    let mut config = ClientConfig::new("http://127.0.0.1:9", "m");
    config.api_key_env_var = "WORLDFORGE_TEST_KEY_THAT_IS_NOT_SET".into();
    assert_eq!(HttpChatModel::from_env(config).err().unwrap().kind, LlmErrorKind::Auth);
}
