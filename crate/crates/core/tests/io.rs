use knotscope::io::{self, FeatureRow, GeometryRow};
use knotscope::persistence::{Bar, Barcode, Scale};
use knotscope::pipeline::{self, CorrelateOptions, FeatureOptions};
use knotscope::sampler::{sample_polygons, SamplerConfig};
use knotscope::Error;
use proptest::prelude::*;

fn write<F: FnOnce(&mut Vec<u8>)>(f: F) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf);
    buf
}

#[test]
fn knots_round_trip_byte_identically() {
    let knots = pipeline::classify_all(&sample_polygons(&SamplerConfig::new(12, 3, 5)).unwrap(), 3, 5).unwrap();
    let bytes = write(|b| io::write_knots_to(b, &knots).unwrap());
    let back = io::read_knots_from(&bytes[..], "mem").unwrap();
    assert_eq!(back.len(), 3);
    assert_eq!(back, knots);
    assert_eq!(write(|b| io::write_knots_to(b, &back).unwrap()), bytes);
}

#[test]
fn tables_round_trip_byte_identically() {
    let knots = pipeline::classify_all(&sample_polygons(&SamplerConfig::new(14, 6, 8)).unwrap(), 3, 8).unwrap();
    let geometry = pipeline::measure_all(&knots).unwrap();
    let barcodes = pipeline::barcodes_all(&knots, None).unwrap();
    let features = pipeline::features_all(&barcodes, Some(&knots), &FeatureOptions::default()).unwrap();
    let (corr, avg) = pipeline::correlate(&pipeline::join(&features, &geometry).unwrap(), &CorrelateOptions::default());

    let g = write(|b| io::write_geometry_to(b, &geometry).unwrap());
    let g_back: Vec<GeometryRow> = io::read_geometry_from(&g[..], "g").unwrap();
    assert_eq!(g_back, geometry);
    assert_eq!(write(|b| io::write_geometry_to(b, &g_back).unwrap()), g);

    let bc = write(|b| io::write_barcodes_to(b, &barcodes).unwrap());
    let bc_back = io::read_barcodes_from(&bc[..], "b").unwrap();
    assert_eq!(bc_back, barcodes);
    assert_eq!(write(|b| io::write_barcodes_to(b, &bc_back).unwrap()), bc);
    let text = String::from_utf8(bc.clone()).unwrap();
    assert!(text.lines().filter(|l| l.ends_with(",inf")).count() == knots.len());

    let f = write(|b| io::write_features_to(b, &features).unwrap());
    let f_back: Vec<FeatureRow> = io::read_features_from(&f[..], "f").unwrap();
    assert_eq!(f_back, features);
    assert_eq!(write(|b| io::write_features_to(b, &f_back).unwrap()), f);

    let c = write(|b| io::write_correlations_to(b, &corr).unwrap());
    assert_eq!(io::read_correlations_from(&c[..], "c").unwrap(), corr);
    let a = write(|b| io::write_averages_to(b, &avg).unwrap());
    assert_eq!(io::read_averages_from(&a[..], "a").unwrap(), avg);
}

#[test]
fn geometry_header_lists_the_documented_columns() {
    let bytes = write(|b| io::write_geometry_to(b, &[]).unwrap());
    let header = String::from_utf8(bytes).unwrap();
    assert!(header.starts_with("id,length,knot_type,rs_volume,hull_volume,rg,curvature,torsion,acn"));
    let bytes = write(|b| io::write_features_to(b, &[]).unwrap());
    assert_eq!(
        String::from_utf8(bytes).unwrap().trim_end(),
        "id,length,knot_type,integral_I,n_bars,max_bar,delta_eps,spike_filtered"
    );
}

#[test]
fn malformed_inputs_report_line_numbers() {
    let csv = "knot_id,dim,birth,death\na,0,0,inf\na,1,0.5\n";
    match io::read_barcodes_from(csv.as_bytes(), "x.csv") {
        Err(Error::Parse { line, path, .. }) => assert_eq!((line, path.as_str()), (3, "x.csv")),
        other => panic!("{other:?}"),
    }
    let csv = "knot_id,dim,birth,death\na,1,0.5,0.2\n";
    assert!(matches!(io::read_barcodes_from(csv.as_bytes(), "x"), Err(Error::Parse { line: 2, .. })));
    // non-unit edges are rejected as invalid embeddings
    let jsonl = concat!(
        r#"{"id":"a","seed":1,"length":3,"knot_type":null,"vertices":[[0,0,0],[1,0,0],[0.5,0.8660254037844386,0]]}"#,
        "\n",
        r#"{"id":"b","seed":1,"length":3,"knot_type":null,"vertices":[[0,0,0],[2,0,0],[1,1,0]]}"#,
        "\n"
    );
    match io::read_knots_from(jsonl.as_bytes(), "k.jsonl") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_files_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("absent.jsonl");
    let err = io::read_knots(&path).unwrap_err();
    assert!(err.to_string().contains("absent.jsonl"));
    assert!(err.is_data_error());
}

#[test]
fn curve_export() {
    let b = Barcode {
        dim0: vec![],
        dim1: vec![Bar::new(0.1, 0.5), Bar::new(0.2, 0.3)],
        scale: Scale::Diameter,
    };
    let c = knotscope::persistence::betti_curve(&b, 1);
    let text = String::from_utf8(write(|w| io::write_curve_to(w, &c).unwrap())).unwrap();
    assert_eq!(text, "t,value\n0.1,1\n0.2,2\n0.3,1\n0.5,0\n");
}

proptest! {
    #[test]
    fn floats_survive_a_barcode_round_trip(vals in proptest::collection::vec((0.0..1e6f64, 0.0..1e6f64), 1..20)) {
        let dim1: Vec<Bar> = vals.iter().map(|&(a, l)| Bar::new(a, a + l)).collect();
        let b = vec![("k".to_string(), Barcode { dim0: vec![Bar::new(0.0, f64::INFINITY)], dim1, scale: Scale::Diameter })];
        let bytes = write(|w| io::write_barcodes_to(w, &b).unwrap());
        let back = io::read_barcodes_from(&bytes[..], "p").unwrap();
        prop_assert_eq!(&back, &b);
        prop_assert_eq!(write(|w| io::write_barcodes_to(w, &back).unwrap()), bytes);
    }
}
