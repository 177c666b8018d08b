//! A deterministic offline corpus of small Verilog repositories in the
//! `repos.jsonl` + `<owner>__<name>/` layout.
//!
//! Files come from parameterized templates (counters, FIFOs, state machines,
//! packages, headers, testbenches) with planted cases for every filter:
//! tool-generated files, GPL notices, oversized files, near-empty files,
//! vendored copies and lightly edited clones.

use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::samples;

pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Debug, Clone, Default)]
pub struct FixtureSummary {
    pub repos: usize,
    pub permissive_repos: usize,
    pub files: usize,
    /// Files in repositories with a permissive license.
    pub permissive_files: usize,
    /// `(repo_id/relative_path, tag)` for every planted special case.
    pub planted: Vec<(String, String)>,
}

struct Style {
    indent: &'static str,
    clk: &'static str,
    rst: &'static str,
    active_low: bool,
    ansi_wire: bool,
}

struct Gen {
    rng: ChaCha8Rng,
    serial: usize,
}

const PREFIXES: &[&str] = &[
    "uart", "spi", "i2c", "axi", "apb", "dma", "pwm", "gpio", "timer", "crc", "lfsr", "dbg", "sync", "edge", "arb",
    "pix", "vga", "adc", "dac", "irq", "bus", "mem", "ctl", "seq",
];
const SIGNALS: &[&str] = &[
    "valid", "ready", "data", "addr", "wdata", "rdata", "we", "re", "sel", "ack", "err", "irq", "busy", "done",
    "start", "length", "burst", "strb", "resp", "last", "tag", "prot", "mode", "level", "count", "status",
];
const STATES: &[&str] = &["IDLE", "BUSY", "ERR", "WAIT", "LOAD", "SEND", "RECV", "DONE", "HOLD", "FLUSH"];
const OWNERS: &[&str] = &[
    "hdlworks", "fpgafun", "openlogic", "siliconlab", "rtlcraft", "bitforge", "gatekeeper", "clockdomain",
    "netlistco", "synthpop", "lutlab", "riscbits", "dspcore", "ioforge", "tinychips", "verihub",
];
const REPO_NAMES: &[&str] = &[
    "uart-core", "fpga-blocks", "rtl-lib", "soc-peripherals", "cpu-playground", "dsp-kit", "video-pipe",
    "ip-cores", "hdl-snippets", "timers", "bus-bridges", "verilog-examples", "edu-labs", "mini-soc", "fifo-lab",
    "crypto-rtl", "pwm-suite", "serdes-lite", "axi-utils", "gpio-ctl", "sensor-hub", "audio-fx", "can-core",
    "spi-master", "i2c-slave", "hls-out", "rv-core", "noc-router",
];

impl Gen {
    fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), serial: 0 }
    }

    fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        *xs.choose(&mut self.rng).expect("non-empty choice")
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn width(&mut self) -> u32 {
        self.pick(&[4, 8, 8, 8, 12, 16, 16, 24, 32])
    }

    fn name(&mut self, base: &str) -> String {
        self.serial += 1;
        let p = self.pick(PREFIXES);
        if self.chance(0.5) {
            format!("{p}_{base}")
        } else {
            format!("{p}_{base}_{}", self.serial % 7)
        }
    }

    fn style(&mut self) -> Style {
        Style {
            indent: self.pick(&["  ", "    ", "\t"]),
            clk: self.pick(&["clk", "clk", "clk_i", "clock"]),
            rst: "",
            active_low: self.chance(0.6),
            ansi_wire: self.chance(0.5),
        }
        .with_reset(self)
    }
}

impl Style {
    fn with_reset(mut self, g: &mut Gen) -> Self {
        self.rst = if self.active_low { g.pick(&["rst_n", "rst_n", "resetn", "aresetn"]) } else { g.pick(&["rst", "reset", "rst_i"]) };
        self
    }

    fn i(&self, n: usize) -> String {
        self.indent.repeat(n)
    }

    fn reset_cond(&self) -> String {
        if self.active_low {
            format!("!{}", self.rst)
        } else {
            self.rst.to_string()
        }
    }

    fn sens(&self) -> String {
        if self.active_low {
            format!("@(posedge {} or negedge {})", self.clk, self.rst)
        } else {
            format!("@(posedge {})", self.clk)
        }
    }

    fn port(&self, dir: &str, width: Option<&str>, name: &str) -> String {
        let kind = if dir == "input" && self.ansi_wire { " wire" } else { "" };
        match width {
            Some(w) => format!("{dir}{kind} [{w}] {name}"),
            None => format!("{dir}{kind} {name}"),
        }
    }

    fn header(&self, name: &str, params: &[(&str, String)], ports: &[String]) -> String {
        let mut s = format!("module {name}");
        if !params.is_empty() {
            let ps: Vec<String> = params.iter().map(|(n, v)| format!("{}parameter {n} = {v}", self.i(1))).collect();
            s.push_str(&format!(" #(\n{}\n)", ps.join(",\n")));
        }
        let ports: Vec<String> = ports.iter().map(|p| format!("{}{p}", self.i(1))).collect();
        s.push_str(&format!(" (\n{}\n);\n", ports.join(",\n")));
        s
    }

    fn clocked(&self, reset_stmts: &[String], run_stmts: &[String]) -> String {
        let (i1, i2, i3) = (self.i(1), self.i(2), self.i(3));
        let mut s = format!("{i1}always {} begin\n{i2}if ({}) begin\n", self.sens(), self.reset_cond());
        for r in reset_stmts {
            s.push_str(&format!("{i3}{r}\n"));
        }
        s.push_str(&format!("{i2}end else begin\n"));
        for r in run_stmts {
            s.push_str(&format!("{i3}{r}\n"));
        }
        s.push_str(&format!("{i2}end\n{i1}end\n"));
        s
    }

    fn clk_ports(&self) -> Vec<String> {
        vec![self.port("input", None, self.clk), self.port("input", None, self.rst)]
    }
}

/// Module text generators; each returns a complete `module ... endmodule`.
impl Gen {
    fn counter(&mut self, st: &Style) -> String {
        let name = self.name("counter");
        let w = self.width();
        let updown = self.chance(0.4);
        let mut ports = st.clk_ports();
        ports.push(st.port("input", None, "en"));
        if updown {
            ports.push(st.port("input", None, "up"));
        }
        ports.push(st.port("output reg", Some("WIDTH-1:0"), "count"));
        let mut s = st.header(&name, &[("WIDTH", w.to_string())], &ports);
        let run = if updown {
            vec![
                "if (en) begin".to_string(),
                format!("{}if (up) count <= count + 1'b1;", st.i(1)),
                format!("{}else count <= count - 1'b1;", st.i(1)),
                "end".to_string(),
            ]
        } else {
            vec!["if (en) count <= count + 1'b1;".to_string()]
        };
        s.push_str(&st.clocked(&["count <= {WIDTH{1'b0}};".into()], &run));
        s.push_str("endmodule\n");
        s
    }

    fn register(&mut self, st: &Style) -> String {
        let name = self.name("reg");
        let w = self.width();
        let mut ports = st.clk_ports();
        ports.push(st.port("input", None, "en"));
        ports.push(st.port("input", Some("WIDTH-1:0"), "d"));
        ports.push(st.port("output reg", Some("WIDTH-1:0"), "q"));
        let mut s = st.header(&name, &[("WIDTH", w.to_string())], &ports);
        s.push_str(&st.clocked(&["q <= {WIDTH{1'b0}};".into()], &["if (en) q <= d;".into()]));
        s.push_str("endmodule\n");
        s
    }

    fn shift_register(&mut self, st: &Style) -> String {
        let name = self.name("shift");
        let w = self.width();
        let mut ports = st.clk_ports();
        ports.push(st.port("input", None, "din"));
        ports.push(st.port("output", None, "dout"));
        let mut s = st.header(&name, &[("DEPTH", w.to_string())], &ports);
        s.push_str(&format!("{}reg [DEPTH-1:0] sr;\n", st.i(1)));
        s.push_str(&st.clocked(&["sr <= {DEPTH{1'b0}};".into()], &["sr <= {sr[DEPTH-2:0], din};".into()]));
        s.push_str(&format!("{}assign dout = sr[DEPTH-1];\nendmodule\n", st.i(1)));
        s
    }

    fn edge_detect(&mut self, st: &Style) -> String {
        let name = self.name("edge_det");
        let mut ports = st.clk_ports();
        ports.push(st.port("input", None, "din"));
        ports.push(st.port("output", None, "rise"));
        ports.push(st.port("output", None, "fall"));
        let mut s = st.header(&name, &[], &ports);
        s.push_str(&format!("{}reg din_q;\n", st.i(1)));
        s.push_str(&st.clocked(&["din_q <= 1'b0;".into()], &["din_q <= din;".into()]));
        s.push_str(&format!("{i}assign rise = din & ~din_q;\n{i}assign fall = ~din & din_q;\nendmodule\n", i = st.i(1)));
        s
    }

    fn synchronizer(&mut self, st: &Style) -> String {
        let name = self.name("sync");
        let mut ports = st.clk_ports();
        ports.push(st.port("input", None, "async_in"));
        ports.push(st.port("output", None, "sync_out"));
        let mut s = st.header(&name, &[], &ports);
        s.push_str(&format!("{}// two flop synchronizer\n{}reg meta, stable;\n", st.i(1), st.i(1)));
        s.push_str(&st.clocked(
            &["meta <= 1'b0;".into(), "stable <= 1'b0;".into()],
            &["meta <= async_in;".into(), "stable <= meta;".into()],
        ));
        s.push_str(&format!("{}assign sync_out = stable;\nendmodule\n", st.i(1)));
        s
    }

    fn mux(&mut self, st: &Style) -> String {
        let name = self.name("mux4");
        let w = self.width();
        let ports = vec![
            st.port("input", Some("1:0"), "sel"),
            st.port("input", Some("WIDTH-1:0"), "a"),
            st.port("input", Some("WIDTH-1:0"), "b"),
            st.port("input", Some("WIDTH-1:0"), "c"),
            st.port("input", Some("WIDTH-1:0"), "d"),
            st.port("output reg", Some("WIDTH-1:0"), "y"),
        ];
        let mut s = st.header(&name, &[("WIDTH", w.to_string())], &ports);
        let (i1, i2, i3) = (st.i(1), st.i(2), st.i(3));
        s.push_str(&format!(
            "{i1}always @(*) begin\n{i2}case (sel)\n{i3}2'd0: y = a;\n{i3}2'd1: y = b;\n{i3}2'd2: y = c;\n{i3}default: y = d;\n{i2}endcase\n{i1}end\nendmodule\n"
        ));
        s
    }

    fn adder(&mut self, st: &Style) -> String {
        let name = self.name("adder");
        let w = self.width();
        let ports = vec![
            st.port("input", Some("WIDTH-1:0"), "a"),
            st.port("input", Some("WIDTH-1:0"), "b"),
            st.port("input", None, "cin"),
            st.port("output", Some("WIDTH-1:0"), "sum"),
            st.port("output", None, "cout"),
        ];
        let mut s = st.header(&name, &[("WIDTH", w.to_string())], &ports);
        s.push_str(&format!("{}assign {{cout, sum}} = a + b + cin;\nendmodule\n", st.i(1)));
        s
    }

    fn comparator(&mut self, st: &Style) -> String {
        let name = self.name("cmp");
        let w = self.width();
        let ports = vec![
            st.port("input", Some("WIDTH-1:0"), "a"),
            st.port("input", Some("WIDTH-1:0"), "b"),
            st.port("output", None, "eq"),
            st.port("output", None, "gt"),
            st.port("output", None, "lt"),
        ];
        let mut s = st.header(&name, &[("WIDTH", w.to_string())], &ports);
        let i = st.i(1);
        s.push_str(&format!("{i}assign eq = (a == b);\n{i}assign gt = (a > b);\n{i}assign lt = (a < b);\nendmodule\n"));
        s
    }

    fn clock_divider(&mut self, st: &Style) -> String {
        let name = self.name("clk_div");
        let w = self.pick(&[16, 20, 24, 26]);
        let mut ports = vec![st.port("input", None, "clk_in")];
        ports.push(st.port("input", None, st.rst));
        ports.push(st.port("output", None, "clk_out"));
        let mut s = st.header(&name, &[("WIDTH", w.to_string())], &ports);
        s.push_str(&format!("{}reg [WIDTH-1:0] cnt_div;\n", st.i(1)));
        let sens = if st.active_low {
            format!("@(posedge clk_in or negedge {})", st.rst)
        } else {
            "@(posedge clk_in)".to_string()
        };
        let (i1, i2) = (st.i(1), st.i(2));
        s.push_str(&format!(
            "{i1}always {sens} begin\n{i2}if ({}) cnt_div <= {{WIDTH{{1'b0}}}};\n{i2}else cnt_div <= cnt_div + 1'b1;\n{i1}end\n{i1}assign clk_out = cnt_div[WIDTH-1];\nendmodule\n",
            st.reset_cond()
        ));
        s
    }

    fn pwm(&mut self, st: &Style) -> String {
        let name = self.name("pwm");
        let w = self.pick(&[8, 10, 12, 16]);
        let mut ports = st.clk_ports();
        ports.push(st.port("input", Some("WIDTH-1:0"), "duty"));
        ports.push(st.port("output", None, "pwm_out"));
        let mut s = st.header(&name, &[("WIDTH", w.to_string())], &ports);
        s.push_str(&format!("{}reg [WIDTH-1:0] cnt;\n", st.i(1)));
        s.push_str(&st.clocked(&["cnt <= {WIDTH{1'b0}};".into()], &["cnt <= cnt + 1'b1;".into()]));
        s.push_str(&format!("{}assign pwm_out = (cnt < duty);\nendmodule\n", st.i(1)));
        s
    }

    fn lfsr(&mut self, st: &Style) -> String {
        let name = self.name("lfsr");
        let w = self.pick(&[8, 16, 32]);
        let tap = self.rng.gen_range(1..w - 1);
        let mut ports = st.clk_ports();
        ports.push(st.port("input", None, "en"));
        ports.push(st.port("output reg", Some("WIDTH-1:0"), "lfsr"));
        let mut s = st.header(&name, &[("WIDTH", w.to_string()), ("TAP", tap.to_string())], &ports);
        s.push_str(&st.clocked(
            &["lfsr <= {{(WIDTH-1){1'b0}}, 1'b1};".into()],
            &["if (en) lfsr <= {lfsr[WIDTH-2:0], lfsr[WIDTH-1] ^ lfsr[TAP]};".into()],
        ));
        s.push_str("endmodule\n");
        s
    }

    fn fsm(&mut self, st: &Style) -> String {
        let name = self.name("fsm");
        let mut ports = st.clk_ports();
        ports.push(st.port("input", None, "start"));
        ports.push(st.port("input", None, "done"));
        ports.push(st.port("output", None, "busy"));
        let mut s = st.header(&name, &[], &ports);
        let (i1, i2, i3) = (st.i(1), st.i(2), st.i(3));
        let states = ["IDLE", "RUN", "WAIT", "DONE"];
        for (k, n) in states.iter().enumerate() {
            s.push_str(&format!("{i1}localparam {n} = 2'd{k};\n"));
        }
        s.push_str(&format!("{i1}reg [1:0] state, next_state;\n"));
        s.push_str(&st.clocked(&["state <= IDLE;".into()], &["state <= next_state;".into()]));
        s.push_str(&format!(
            "{i1}always @(*) begin\n{i2}next_state = state;\n{i2}case (state)\n{i3}IDLE: if (start) next_state = RUN;\n{i3}RUN: next_state = WAIT;\n{i3}WAIT: if (done) next_state = DONE;\n{i3}DONE: next_state = IDLE;\n{i3}default: next_state = IDLE;\n{i2}endcase\n{i1}end\n{i1}assign busy = (state != IDLE);\nendmodule\n"
        ));
        s
    }

    fn fifo(&mut self, st: &Style) -> String {
        let name = self.name("fifo");
        let w = self.width();
        let aw = self.pick(&[2, 3, 4, 5]);
        let mut ports = st.clk_ports();
        ports.push(st.port("input", None, "wr_en"));
        ports.push(st.port("input", None, "rd_en"));
        ports.push(st.port("input", Some("DATA_W-1:0"), "wr_data"));
        ports.push(st.port("output", Some("DATA_W-1:0"), "rd_data"));
        ports.push(st.port("output", None, "full"));
        ports.push(st.port("output", None, "empty"));
        let mut s = st.header(&name, &[("DATA_W", w.to_string()), ("ADDR_W", aw.to_string())], &ports);
        let i1 = st.i(1);
        s.push_str(&format!(
            "{i1}reg [DATA_W-1:0] mem [0:(1<<ADDR_W)-1];\n{i1}reg [ADDR_W:0] wr_ptr, rd_ptr;\n"
        ));
        s.push_str(&st.clocked(
            &["wr_ptr <= 0;".into(), "rd_ptr <= 0;".into()],
            &[
                "if (wr_en && !full) begin".into(),
                format!("{}mem[wr_ptr[ADDR_W-1:0]] <= wr_data;", st.i(1)),
                format!("{}wr_ptr <= wr_ptr + 1'b1;", st.i(1)),
                "end".into(),
                "if (rd_en && !empty) rd_ptr <= rd_ptr + 1'b1;".into(),
            ],
        ));
        s.push_str(&format!(
            "{i1}assign rd_data = mem[rd_ptr[ADDR_W-1:0]];\n{i1}assign empty = (wr_ptr == rd_ptr);\n{i1}assign full = (wr_ptr[ADDR_W] != rd_ptr[ADDR_W]) && (wr_ptr[ADDR_W-1:0] == rd_ptr[ADDR_W-1:0]);\nendmodule\n"
        ));
        s
    }

    fn decoder(&mut self, st: &Style) -> String {
        let name = self.name("decoder");
        let n = self.pick(&[2, 3, 4]);
        let ports = vec![
            st.port("input", Some("N-1:0"), "in"),
            st.port("input", None, "en"),
            st.port("output", Some("(1<<N)-1:0"), "out"),
        ];
        let mut s = st.header(&name, &[("N", n.to_string())], &ports);
        s.push_str(&format!("{}assign out = en ? ({{{{(1<<N)-1{{1'b0}}}}, 1'b1}} << in) : {{(1<<N){{1'b0}}}};\nendmodule\n", st.i(1)));
        s
    }

    fn gray_module(&mut self, st: &Style) -> String {
        let name = self.name("gray");
        let w = self.width();
        let ports = vec![st.port("input", Some("WIDTH-1:0"), "bin"), st.port("output", Some("WIDTH-1:0"), "gray")];
        let mut s = st.header(&name, &[("WIDTH", w.to_string())], &ports);
        let (i1, i2) = (st.i(1), st.i(2));
        s.push_str(&format!(
            "{i1}function [WIDTH-1:0] bin2gray;\n{i2}input [WIDTH-1:0] b;\n{i2}begin\n{i2}bin2gray = b ^ (b >> 1);\n{i2}end\n{i1}endfunction\n{i1}assign gray = bin2gray(bin);\nendmodule\n"
        ));
        s
    }

    fn parity_module(&mut self, st: &Style) -> String {
        let name = self.name("parity");
        let w = self.width();
        let ports = vec![st.port("input", Some("WIDTH-1:0"), "data"), st.port("output", None, "par")];
        let mut s = st.header(&name, &[("WIDTH", w.to_string())], &ports);
        let (i1, i2, i3) = (st.i(1), st.i(2), st.i(3));
        s.push_str(&format!(
            "{i1}function calc_parity;\n{i2}input [WIDTH-1:0] v;\n{i2}integer k;\n{i2}begin\n{i3}calc_parity = 1'b0;\n{i3}for (k = 0; k < WIDTH; k = k + 1)\n{i3}{i1}calc_parity = calc_parity ^ v[k];\n{i2}end\n{i1}endfunction\n{i1}assign par = calc_parity(data);\nendmodule\n"
        ));
        s
    }

    fn debounce(&mut self, st: &Style) -> String {
        let name = self.name("debounce");
        let mut ports = st.clk_ports();
        ports.push(st.port("input", None, "btn"));
        ports.push(st.port("output reg", None, "btn_clean"));
        let mut s = st.header(&name, &[("CNT_W", self.pick(&[12, 16, 20]).to_string())], &ports);
        s.push_str(&format!("{}reg [CNT_W-1:0] cnt;\n", st.i(1)));
        s.push_str(&st.clocked(
            &["cnt <= {CNT_W{1'b0}};".into(), "btn_clean <= 1'b0;".into()],
            &[
                "if (btn == btn_clean) cnt <= {CNT_W{1'b0}};".into(),
                "else if (&cnt) btn_clean <= btn;".into(),
                "else cnt <= cnt + 1'b1;".into(),
            ],
        ));
        s.push_str("endmodule\n");
        s
    }

    fn top(&mut self, st: &Style) -> String {
        let name = self.name("top");
        let mut ports = st.clk_ports();
        ports.push(st.port("input", None, "btn"));
        ports.push(st.port("output", Some("7:0"), "leds"));
        let mut s = st.header(&name, &[], &ports);
        let (i1, i2) = (st.i(1), st.i(2));
        s.push_str(&format!("{i1}wire btn_clean;\n{i1}wire [7:0] count;\n"));
        s.push_str(&format!(
            "{i1}debounce u_db (\n{i2}.{c}({c}),\n{i2}.{r}({r}),\n{i2}.btn(btn),\n{i2}.btn_clean(btn_clean)\n{i1});\n",
            c = st.clk,
            r = st.rst
        ));
        s.push_str(&format!(
            "{i1}counter #(.WIDTH(8)) u_cnt (\n{i2}.{c}({c}),\n{i2}.{r}({r}),\n{i2}.en(btn_clean),\n{i2}.count(count)\n{i1});\n{i1}assign leds = count;\nendmodule\n",
            c = st.clk,
            r = st.rst
        ));
        s
    }

    fn testbench(&mut self, st: &Style) -> String {
        let dut = self.name("counter");
        let name = format!("tb_{dut}");
        let (i1, i2) = (st.i(1), st.i(2));
        let rst_on = if st.active_low { "0" } else { "1" };
        let rst_off = if st.active_low { "1" } else { "0" };
        format!(
            "module {name};\n{i1}reg {c};\n{i1}reg {r};\n{i1}reg en;\n{i1}wire [7:0] count;\n\
             {i1}{dut} #(.WIDTH(8)) dut (\n{i2}.{c}({c}),\n{i2}.{r}({r}),\n{i2}.en(en),\n{i2}.count(count)\n{i1});\n\
             {i1}initial begin\n{i2}{c} = 1'b0;\n{i2}forever #5 {c} = ~{c};\n{i1}end\n\
             {i1}initial begin\n{i2}{r} = 1'b{rst_on};\n{i2}en = 1'b0;\n{i2}#20 {r} = 1'b{rst_off};\n{i2}#10 en = 1'b1;\n{i2}#200;\n{i2}$display(\"count = %d\", count);\n{i2}$finish;\n{i1}end\nendmodule\n",
            c = st.clk,
            r = st.rst
        )
    }

    fn random_module(&mut self, st: &Style) -> String {
        match self.rng.gen_range(0..17) {
            0 => self.counter(st),
            1 => self.register(st),
            2 => self.shift_register(st),
            3 => self.edge_detect(st),
            4 => self.synchronizer(st),
            5 => self.mux(st),
            6 => self.adder(st),
            7 => self.comparator(st),
            8 => self.clock_divider(st),
            9 => self.pwm(st),
            10 => self.lfsr(st),
            11 => self.fsm(st),
            12 => self.fifo(st),
            13 => self.decoder(st),
            14 => self.gray_module(st),
            15 => self.parity_module(st),
            _ => self.debounce(st),
        }
    }
}

/// Non-module file bodies: packages, headers, interfaces.
impl Gen {
    fn clog2_function(&mut self, st: &Style) -> String {
        let (i1, i2) = (st.i(1), st.i(2));
        format!(
            "function integer clog2;\n{i1}input integer value;\n{i1}begin\n{i2}value = value - 1;\n{i2}for (clog2 = 0; value > 0; clog2 = clog2 + 1)\n{i2}{i1}value = value >> 1;\n{i1}end\nendfunction\n"
        )
    }

    fn signals(&mut self, n: usize) -> Vec<&'static str> {
        let mut pool = SIGNALS.to_vec();
        pool.shuffle(&mut self.rng);
        pool.truncate(n);
        pool
    }

    fn package(&mut self, st: &Style) -> String {
        let p = self.pick(PREFIXES);
        let (i1, i2) = (st.i(1), st.i(2));
        let w = self.width();
        let mut s = format!("package {p}_pkg;\n");
        s.push_str(&format!("{i1}localparam int DATA_W = {w};\n{i1}localparam int ADDR_W = {};\n", self.pick(&[8, 12, 16, 32])));
        let n = self.rng.gen_range(2..6);
        for f in self.signals(n) {
            s.push_str(&format!("{i1}localparam int {}_OFFSET = {};\n", f.to_uppercase(), 4 * self.rng.gen_range(0..64)));
        }
        s.push_str(&format!("{i1}typedef logic [DATA_W-1:0] data_t;\n"));
        let mut states: Vec<&str> = STATES.to_vec();
        states.shuffle(&mut self.rng);
        states.truncate(self.rng.gen_range(3..7));
        let ew = if states.len() > 4 { 3 } else { 2 };
        let items: Vec<String> = states.iter().map(|x| format!("{i2}ST_{x}")).collect();
        s.push_str(&format!("{i1}typedef enum logic [{}:0] {{\n{}\n{i1}}} state_t;\n", ew - 1, items.join(",\n")));
        if self.chance(0.6) {
            let n = self.rng.gen_range(2..5);
            let fields: Vec<String> = self
                .signals(n)
                .into_iter()
                .map(|f| format!("{i2}logic [{}:0] {f};", self.width() - 1))
                .collect();
            s.push_str(&format!("{i1}typedef struct packed {{\n{}\n{i1}}} {p}_req_t;\n", fields.join("\n")));
        }
        if self.chance(0.7) {
            s.push_str(&format!(
                "{i1}function automatic data_t swap_bytes(input data_t v);\n{i2}return {{v[7:0], v[DATA_W-1:8]}};\n{i1}endfunction\n"
            ));
        }
        if self.chance(0.5) {
            s.push_str(&format!(
                "{i1}function automatic logic is_{}(input state_t s);\n{i2}return s == ST_{};\n{i1}endfunction\n",
                states[0].to_lowercase(),
                states[0]
            ));
        }
        s.push_str(&format!("endpackage : {p}_pkg\n"));
        s
    }

    fn header_file(&mut self, st: &Style) -> String {
        let p = self.pick(PREFIXES).to_uppercase();
        let guard = format!("{p}_DEFS_VH");
        let mut s = format!("`ifndef {guard}\n`define {guard}\n\n");
        for (k, v) in [("DATA_WIDTH", self.width()), ("ADDR_WIDTH", self.pick(&[8, 10, 12, 16]))] {
            s.push_str(&format!("`define {k} {v}\n"));
        }
        s.push_str(&format!("`define RESET_VALUE {}'h0\n", self.width()));
        let n = self.rng.gen_range(3..8);
        for f in self.signals(n) {
            s.push_str(&format!("`define {p}_{}_ADDR 8'h{:02x}\n", f.to_uppercase(), self.rng.gen_range(0..256u32)));
        }
        let ops = ["NOP", "ADD", "SUB", "AND", "OR", "XOR", "SLL", "SRL", "LD", "ST"];
        for (k, op) in ops.iter().take(self.rng.gen_range(3..ops.len())).enumerate() {
            s.push_str(&format!("localparam OP_{op} = 4'h{k:x};\n"));
        }
        if self.chance(0.4) {
            s.push('\n');
            s.push_str(&self.clog2_function(st));
        }
        s.push_str(&format!("\n`endif // {guard}\n"));
        s
    }

    fn interface(&mut self, st: &Style) -> String {
        let p = self.pick(PREFIXES);
        let (i1, i2) = (st.i(1), st.i(2));
        let c = st.clk;
        let w = self.width();
        let n = self.rng.gen_range(3..7);
        let sigs = self.signals(n);
        let mut s = format!("interface {p}_if #(parameter int W = {w}) (input logic {c});\n");
        for (k, x) in sigs.iter().enumerate() {
            if k == 0 {
                s.push_str(&format!("{i1}logic [W-1:0] {x};\n"));
            } else {
                s.push_str(&format!("{i1}logic {x};\n"));
            }
        }
        let (outs, ins) = sigs.split_at(sigs.len() - 1);
        s.push_str(&format!(
            "{i1}modport master (\n{i2}output {},\n{i2}input {}\n{i1});\n{i1}modport slave (\n{i2}input {},\n{i2}output {}\n{i1});\n",
            outs.join(", "),
            ins.join(", "),
            outs.join(", "),
            ins.join(", ")
        ));
        if self.chance(0.5) {
            s.push_str(&format!("{i1}clocking cb @(posedge {c});\n{i2}default input #1 output #1;\n"));
            s.push_str(&format!("{i2}output {};\n{i2}input {};\n{i1}endclocking\n", outs.join(", "), ins.join(", ")));
        }
        if self.chance(0.5) {
            s.push_str(&format!("{i1}task automatic reset_bus();\n"));
            for x in outs {
                s.push_str(&format!("{i2}{x} <= '0;\n"));
            }
            s.push_str(&format!("{i2}repeat (2) @(posedge {c});\n{i1}endtask\n"));
        }
        if self.chance(0.4) {
            s.push_str(&format!(
                "{i1}property p_{x}_stable;\n{i2}@(posedge {c}) {x} && !{y} |=> $stable({x});\n{i1}endproperty\n{i1}assert property (p_{x}_stable);\n",
                x = outs[0],
                y = ins[0]
            ));
        }
        s.push_str("endinterface\n");
        s
    }

    /// Class-based verification package: transaction, driver and monitor.
    fn class_testbench(&mut self, st: &Style) -> String {
        let p = self.pick(PREFIXES);
        let (i1, i2, i3, i4) = (st.i(1), st.i(2), st.i(3), st.i(4));
        let n = self.rng.gen_range(3..6);
        let sigs = self.signals(n);
        let (w, lim) = (self.width(), self.rng.gen_range(4..200));
        let mut s = format!("package {p}_tb_pkg;\n");
        let txn = format!("{p}_txn");
        s.push_str(&format!("{i1}class {txn};\n"));
        for (k, x) in sigs.iter().enumerate() {
            if k == 0 {
                s.push_str(&format!("{i2}rand bit [{}:0] {x};\n", w - 1));
            } else {
                s.push_str(&format!("{i2}rand bit {x};\n"));
            }
        }
        s.push_str(&format!("{i2}constraint c_{x} {{ {x} < {lim}; }}\n", x = sigs[0]));
        if self.chance(0.5) {
            let fmt: Vec<String> = sigs.iter().map(|x| format!("{x}=%0h")).collect();
            s.push_str(&format!(
                "{i2}function void display();\n{i3}$display(\"{txn} {}\", {});\n{i2}endfunction\n",
                fmt.join(" "),
                sigs.join(", ")
            ));
        }
        s.push_str(&format!("{i1}endclass\n\n"));

        let c = st.clk;
        s.push_str(&format!(
            "{i1}class {p}_driver;\n{i2}virtual {p}_if vif;\n{i2}mailbox #({txn}) mbx;\n{i2}int unsigned sent;\n\n"
        ));
        s.push_str(&format!(
            "{i2}function new(virtual {p}_if vif, mailbox #({txn}) mbx);\n{i3}this.vif = vif;\n{i3}this.mbx = mbx;\n{i2}endfunction\n\n"
        ));
        s.push_str(&format!("{i2}task run();\n{i3}{txn} t;\n{i3}forever begin\n{i4}mbx.get(t);\n{i4}@(posedge vif.{c});\n"));
        for x in &sigs {
            s.push_str(&format!("{i4}vif.{x} <= t.{x};\n"));
        }
        s.push_str(&format!("{i4}sent++;\n{i3}end\n{i2}endtask\n{i1}endclass\n"));
        if self.chance(0.6) {
            s.push_str(&format!(
                "\n{i1}class {p}_monitor;\n{i2}virtual {p}_if vif;\n{i2}mailbox #({txn}) out;\n\n{i2}task run();\n{i3}forever begin\n{i4}{txn} t = new();\n{i4}@(posedge vif.{c});\n"
            ));
            for x in &sigs {
                s.push_str(&format!("{i4}t.{x} = vif.{x};\n"));
            }
            s.push_str(&format!("{i4}out.put(t);\n{i3}end\n{i2}endtask\n{i1}endclass\n"));
        }
        s.push_str(&format!("endpackage : {p}_tb_pkg\n"));
        s
    }

    fn file_preamble(&mut self, owner: &str) -> String {
        let mut s = String::new();
        match self.rng.gen_range(0..4) {
            0 => s.push_str(&format!("// SPDX-License-Identifier: MIT\n// Copyright (c) 2021 {owner}\n\n")),
            1 => s.push_str(&format!(
                "/*\n * Copyright 2020 {owner}\n * Licensed under the Apache License, Version 2.0\n */\n\n"
            )),
            2 => s.push_str("// Simple building block.\n\n"),
            _ => {}
        }
        if self.chance(0.5) {
            s.push_str("`timescale 1ns / 1ps\n");
        }
        if self.chance(0.2) {
            s.push_str("`default_nettype none\n");
        }
        if self.chance(0.2) {
            s.push_str("`include \"defs.vh\"\n");
        }
        if !s.is_empty() && !s.ends_with("\n\n") {
            s.push('\n');
        }
        s
    }
}

struct RepoPlan {
    owner: &'static str,
    name: &'static str,
    license: &'static str,
    stars: u64,
    fork: bool,
    files: Vec<(String, String)>,
}

impl RepoPlan {
    fn repo_id(&self) -> String {
        format!("github.com/{}/{}", self.owner, self.name)
    }
}

fn autogenerated_file(g: &mut Gen) -> String {
    let tool = g.pick(&["regtool", "csrgen", "vivado ip wizard", "chisel"]);
    let mut s = format!(
        "// This file was automatically generated by {tool}.\n// Do not edit by hand.\nmodule {} (\n  input clk,\n  input [7:0] addr,\n  output reg [31:0] rdata\n);\n  always @(posedge clk) begin\n    case (addr)\n",
        g.name("regs")
    );
    for k in 0..40 {
        s.push_str(&format!("      8'h{:02x}: rdata <= 32'h{:08x};\n", k * 4, g.rng.gen::<u32>()));
    }
    s.push_str("      default: rdata <= 32'h0;\n    endcase\n  end\nendmodule\n");
    s
}

fn gpl_file(g: &mut Gen, st: &Style) -> String {
    format!(
        "// This program is free software: you can redistribute it and/or modify\n// it under the terms of the GNU General Public License as published by\n// the Free Software Foundation, either version 3 of the License.\n\n{}",
        g.random_module(st)
    )
}

fn long_line_file(g: &mut Gen) -> String {
    let terms: Vec<String> = (0..180).map(|k| format!("in[{k}]")).collect();
    format!("module {} (input [179:0] in, output out);\n  assign out = {};\nendmodule\n", g.name("wide_xor"), terms.join(" ^ "))
}

fn huge_file(g: &mut Gen) -> String {
    let mut s = format!("module {} (input [13:0] addr, output reg [7:0] data);\n  always @(*) begin\n    case (addr)\n", g.name("rom"));
    for k in 0..10_050u32 {
        s.push_str(&format!("      14'd{k}: data = 8'h{:02x};\n", (k * 37 + 11) % 256));
    }
    s.push_str("      default: data = 8'h00;\n    endcase\n  end\nendmodule\n");
    s
}

/// Copy with a changed comment and one changed default, keeping the token
/// set nearly identical.
fn lightly_edited(text: &str) -> String {
    let mut out = format!("// local copy\n{text}");
    for w in ["= 8\n", "= 16\n", "= 32\n", "= 24\n", "= 12\n", "= 4\n"] {
        if out.contains(w) {
            out = out.replacen(w, "= 64\n", 1);
            break;
        }
    }
    out
}

fn plan(seed: u64) -> Vec<RepoPlan> {
    let mut g = Gen::new(seed);
    let licenses = [
        "mit", "mit", "mit", "apache-2.0", "apache-2.0", "bsd-3-clause", "bsd-2-clause", "isc", "unlicense", "mit",
        "apache-2.0", "mit", "bsd-3-clause", "mit", "0bsd", "mit", "apache-2.0", "mit", "zlib", "mit", "isc", "mit",
        "mit", "gpl-3.0", "gpl-2.0", "none", "other", "mit",
    ];
    let mut repos = Vec::new();
    for (k, &license) in licenses.iter().enumerate() {
        let owner = OWNERS[k % OWNERS.len()];
        let name = REPO_NAMES[k % REPO_NAMES.len()];
        let stars = if g.chance(0.2) { 0 } else { g.rng.gen_range(1..2_000) };
        let st = g.style();
        let n_files = g.rng.gen_range(8..=12);
        let mut files = Vec::new();
        for f in 0..n_files {
            let kind = g.rng.gen_range(0..100);
            let pre = g.file_preamble(owner);
            let (path, body) = match kind {
                0..=44 => {
                    let n = g.rng.gen_range(1..=3);
                    let mods: Vec<String> = (0..n).map(|_| g.random_module(&st)).collect();
                    (format!("rtl/block_{f}.v"), format!("{pre}{}", mods.join("\n")))
                }
                45..=53 => (format!("rtl/pkg_{f}.sv"), format!("{pre}{}", g.package(&st))),
                54..=61 => (format!("include/defs_{f}.vh"), g.header_file(&st)),
                62..=68 => (format!("rtl/bus_if_{f}.sv"), format!("{pre}{}", g.interface(&st))),
                69..=77 => (format!("tb/tb_{f}.v"), format!("{pre}{}", g.testbench(&st))),
                78..=89 => (format!("tb/env_pkg_{f}.sv"), format!("{pre}{}", g.class_testbench(&st))),
                _ => (format!("rtl/top_{f}.v"), format!("{pre}{}\n{}", g.top(&st), g.random_module(&st))),
            };
            files.push((path, body));
        }
        repos.push(RepoPlan { owner, name, license, stars, fork: k == licenses.len() - 1, files });
    }
    repos
}

/// Writes the corpus under `root` and describes what was planted.
pub fn write_fixture_corpus(root: &Path, seed: u64) -> io::Result<FixtureSummary> {
    let mut repos = plan(seed);
    let mut g = Gen::new(seed ^ 0x5eed);
    let mut planted = Vec::new();
    let permissive: Vec<usize> =
        (0..repos.len()).filter(|&i| !matches!(repos[i].license, "gpl-3.0" | "gpl-2.0" | "none" | "other")).collect();
    let mut add = |repos: &mut Vec<RepoPlan>, r: usize, path: String, body: String, tag: &str| {
        planted.push((format!("{}/{}", repos[r].repo_id(), path), tag.to_string()));
        repos[r].files.push((path, body));
    };
    let st = g.style();
    for k in 0..6 {
        let r = permissive[(k * 5 + 1) % permissive.len()];
        add(&mut repos, r, format!("gen/regs_{k}.v"), autogenerated_file(&mut g), "autogenerated");
    }
    for k in 0..5 {
        let r = permissive[(k * 7 + 2) % permissive.len()];
        let body = gpl_file(&mut g, &st);
        add(&mut repos, r, format!("third_party/gpl_{k}.v"), body, "license_notice");
    }
    {
        let r = permissive[3];
        let body = format!(
            "// Copyright (c) 2019 Example Corp. All rights reserved.\n// Released under the MIT License.\n{}",
            g.random_module(&st)
        );
        add(&mut repos, r, "rtl/whitelisted.v".into(), body, "notice_whitelisted");
    }
    for k in 0..2 {
        let r = permissive[(k * 9 + 4) % permissive.len()];
        add(&mut repos, r, format!("rtl/wide_{k}.v"), long_line_file(&mut g), "line_too_long");
    }
    add(&mut repos, permissive[5], "rtl/rom_table.v".into(), huge_file(&mut g), "too_many_lines");
    add(&mut repos, permissive[6], "rtl/stub.v".into(), "`include \"a.vh\"\n".into(), "too_small");
    add(&mut repos, permissive[7], "rtl/notes.v".into(), "// TODO: write the decoder\n/* nothing here yet */\n".repeat(3), "empty_after_comments");

    // vendored copies and lightly edited clones across repositories
    for k in 0..8 {
        let src = permissive[(k * 3) % permissive.len()];
        let dst = permissive[(k * 3 + 11) % permissive.len()];
        let (path, body) = repos[src].files[k % 4].clone();
        add(&mut repos, dst, format!("vendor/{}", path.replace('/', "_")), body, "exact_duplicate");
    }
    for k in 0..6 {
        let src = permissive[(k * 5 + 2) % permissive.len()];
        let dst = permissive[(k * 5 + 13) % permissive.len()];
        let (path, body) = repos[src].files[0].clone();
        add(&mut repos, dst, format!("ext/{}", path.replace('/', "_")), lightly_edited(&body), "near_duplicate");
    }

    // the reference samples, plain and wrapped in decoy comments
    let r = permissive[8];
    add(&mut repos, r, "rtl/clk_divider.v".into(), samples::CLK_DIVIDER.to_string(), "sample_module");
    let pkg = format!("package str_utils_pkg;\n{}endpackage\n", samples::SPLIT_STRING);
    add(&mut repos, r, "rtl/str_utils_pkg.sv".into(), pkg, "sample_function");
    let r = permissive[9];
    add(
        &mut repos,
        r,
        "rtl/clk_divider_doc.v".into(),
        samples::with_decoy_comments(samples::CLK_DIVIDER),
        "sample_module_decoy",
    );
    add(
        &mut repos,
        r,
        "rtl/split_string_doc.sv".into(),
        samples::with_decoy_comments(samples::SPLIT_STRING),
        "sample_function_decoy",
    );

    fs::create_dir_all(root)?;
    let mut lines = String::new();
    let mut summary = FixtureSummary { repos: repos.len(), planted, ..Default::default() };
    for repo in &repos {
        let dir_name = format!("{}__{}", repo.owner, repo.name);
        let dir = root.join(&dir_name);
        for (path, body) in &repo.files {
            let p = dir.join(path);
            fs::create_dir_all(p.parent().expect("file has a parent"))?;
            fs::write(&p, body)?;
        }
        fs::write(dir.join("README.md"), format!("# {}\n", repo.name))?;
        summary.files += repo.files.len();
        if !matches!(repo.license, "gpl-3.0" | "gpl-2.0" | "none" | "other") {
            summary.permissive_repos += 1;
            summary.permissive_files += repo.files.len();
        }
        let rec = serde_json::json!({
            "repo_id": repo.repo_id(),
            "url": format!("https://github.com/{}/{}", repo.owner, repo.name),
            "license_id": repo.license,
            "stars": repo.stars,
            "snapshot_path": dir_name,
            "fork": repo.fork,
        });
        lines.push_str(&rec.to_string());
        lines.push('\n');
    }
    fs::write(root.join("repos.jsonl"), lines)?;
    Ok(summary)
}
