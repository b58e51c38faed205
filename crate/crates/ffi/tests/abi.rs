use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use tokennet_ffi::*;

unsafe fn graph(n: usize, pairs: &[(u32, u32)]) -> *mut TnGraph {
    let flat: Vec<u32> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut out = ptr::null_mut();
    assert_eq!(
        tn_graph_from_edges(2021, 4, 5, n, flat.as_ptr(), pairs.len(), &mut out),
        TnStatus::Ok
    );
    out
}

unsafe fn last_error() -> String {
    let p = tn_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

#[test]
fn two_triangles_topology() {
    unsafe {
        let g = graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let mut t = TnTopology::default();
        assert_eq!(tn_topology(g, 0, &mut t), TnStatus::Ok);
        assert_eq!(t.n_components, 2);
        assert_eq!(t.largest_component_ratio, 0.5);
        assert!((t.modularity - 0.5).abs() < 1e-12);
        assert_eq!(t.degree_centrality_std, 0.0);
        assert!(tn_last_error().is_null());
        tn_graph_free(g);
    }
}

#[test]
fn star_core_and_buffer_protocol() {
    unsafe {
        let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let mut config = tn_core_config_default();
        config.run_test = false;
        let mut r = TnCoreResult::default();
        assert_eq!(tn_core_periphery(g, &config, &mut r), TnStatus::Ok);
        assert_eq!((r.n_core, r.avg_core_degree, r.z_error), (1, 4.0, 0));
        assert!(!r.has_p_value && !r.significant);

        let mut len = 0usize;
        assert_eq!(tn_core_nodes(g, ptr::null_mut(), 0, &mut len), TnStatus::BufferTooSmall);
        assert_eq!(len, 1);
        let mut buf = [u32::MAX; 1];
        assert_eq!(tn_core_nodes(g, buf.as_mut_ptr(), 1, &mut len), TnStatus::Ok);
        assert_eq!(buf, [0]);
        tn_graph_free(g);
    }
}

#[test]
fn significance_through_the_abi() {
    unsafe {
        // 5-clique plus 30 pendants each tied to two core nodes
        let mut pairs = Vec::new();
        for a in 0..5u32 {
            for b in a + 1..5 {
                pairs.push((a, b));
            }
        }
        for p in 0..30u32 {
            pairs.push((5 + p, p % 5));
            pairs.push((5 + p, (p + 1) % 5));
        }
        let g = graph(35, &pairs);
        let config = tn_core_config_default();
        let mut r = TnCoreResult::default();
        assert_eq!(tn_core_periphery(g, &config, &mut r), TnStatus::Ok);
        assert!(r.has_p_value && r.p_value < 0.05 && r.significant);
        assert_eq!(r.n_core, 5);
        tn_graph_free(g);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut out = ptr::null_mut();
        let pairs = [0u32, 0];
        assert_eq!(
            tn_graph_from_edges(2021, 4, 5, 1, pairs.as_ptr(), 1, &mut out),
            TnStatus::Graph
        );
        assert!(out.is_null());
        assert!(last_error().contains("self-loop"), "{}", last_error());

        assert_eq!(
            tn_graph_from_edges(2021, 2, 30, 0, ptr::null(), 0, &mut out),
            TnStatus::InvalidArgument
        );
        assert_eq!(tn_topology(ptr::null(), 0, ptr::null_mut()), TnStatus::NullPointer);
        assert_eq!(tn_graph_node_count(ptr::null()), 0);

        let mut config = tn_core_config_default();
        config.replicates = 0;
        let g = graph(2, &[(0, 1)]);
        let mut r = TnCoreResult::default();
        assert_eq!(tn_core_periphery(g, &config, &mut r), TnStatus::Core);
        let mut addr = ptr::null_mut();
        assert_eq!(tn_graph_address(g, 9, &mut addr), TnStatus::InvalidArgument);
        tn_graph_free(g);
        tn_graph_free(ptr::null_mut());
    }
}

#[test]
fn dataset_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    std::fs::write(
        &csv,
        "token_address,from_address,to_address,value,block_timestamp\n\
         0xaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa,0x0000000000000000000000000000000000000001,0x0000000000000000000000000000000000000002,5,2021-04-05 01:00:00 UTC\n\
         0xaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa,0x0000000000000000000000000000000000000002,0x0000000000000000000000000000000000000003,5,2021-04-06 01:00:00 UTC\n",
    )
    .unwrap();
    let config = tokennet::pipeline::RunConfig {
        inputs: vec![csv],
        token: Some("T".into()),
        out: dir.path().join("out"),
        ..Default::default()
    };
    let summary = tokennet::pipeline::cmd_ingest(&config).unwrap();
    unsafe {
        let path = CString::new(summary.dir.to_str().unwrap()).unwrap();
        let mut ds = ptr::null_mut();
        assert_eq!(tn_dataset_load(path.as_ptr(), &mut ds), TnStatus::Ok);
        assert_eq!(tn_dataset_len(ds), 2);
        let g = tn_dataset_graph(ds, 1);
        assert_eq!(tn_graph_edge_count(g), 1);
        let mut addr = ptr::null_mut();
        assert_eq!(tn_graph_address(g, 0, &mut addr), TnStatus::Ok);
        assert_eq!(
            CStr::from_ptr(addr).to_str().unwrap(),
            "0x0000000000000000000000000000000000000002"
        );
        tn_string_free(addr);
        assert!(tn_dataset_graph(ds, 2).is_null());
        tn_dataset_free(ds);

        let missing = CString::new(dir.path().join("nope").to_str().unwrap()).unwrap();
        assert_eq!(tn_dataset_load(missing.as_ptr(), &mut ds), TnStatus::Io);
        assert!(ds.is_null());
    }
}

fn static_lib() -> Option<PathBuf> {
    // tests live in target/<profile>/deps; the library one level up
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libtokennet_ffi.a");
    lib.is_file().then_some(lib)
}

#[test]
fn c_program_links_against_header() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let Some(lib) = static_lib() else {
        eprintln!("skipping: static library not found next to the test binary");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(crate_dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C smoke test failed to build");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
