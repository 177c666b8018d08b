//! The function and module definition/body samples shown in the dataset's
//! published examples, with their original line breaks.

pub const SPLIT_STRING_DEFINITION: &str =
    "function void split_string(string str, \n    byte step, ref string result[$]);";

pub const SPLIT_STRING_BODY: &str = r#"
string tmp_str; 
int i;
bit in_quote;
result = {};
while (i < str.len()) begin
  if (str[i] == "\"") begin
    in_quote = ~in_quote;
  end else if ((str[i] == step) 
        && !in_quote) begin
    result.push_back(tmp_str);
    tmp_str = "";
  end else begin
    tmp_str = {tmp_str, str[i]};
  end
  if (i == str.len()-1) begin
    result.push_back(tmp_str);
  end
  i++;
end
endfunction"#;

pub const CLK_DIVIDER_DEFINITION: &str =
    "module clk_divider \n#(parameter WIDTH = 24) (input  clk_in, \n    input  rst_n, output clk_out);";

pub const CLK_DIVIDER_BODY: &str = r#"
reg [WIDTH-1:0] cnt_div;
always@(posedge clk_in or negedge rst_n)
begin
if(!rst_n)
  cnt_div <= {WIDTH{1'b0}};
else
  cnt_div <= cnt_div + 1'b1;
end
assign clk_out = cnt_div[WIDTH-1];
endmodule"#;

pub const SPLIT_STRING: &str = concat!(
    "function void split_string(string str, \n    byte step, ref string result[$]);",
    r#"
string tmp_str; 
int i;
bit in_quote;
result = {};
while (i < str.len()) begin
  if (str[i] == "\"") begin
    in_quote = ~in_quote;
  end else if ((str[i] == step) 
        && !in_quote) begin
    result.push_back(tmp_str);
    tmp_str = "";
  end else begin
    tmp_str = {tmp_str, str[i]};
  end
  if (i == str.len()-1) begin
    result.push_back(tmp_str);
  end
  i++;
end
endfunction"#,
    "\n"
);

pub const CLK_DIVIDER: &str = concat!(
    "module clk_divider \n#(parameter WIDTH = 24) (input  clk_in, \n    input  rst_n, output clk_out);",
    r#"
reg [WIDTH-1:0] cnt_div;
always@(posedge clk_in or negedge rst_n)
begin
if(!rst_n)
  cnt_div <= {WIDTH{1'b0}};
else
  cnt_div <= cnt_div + 1'b1;
end
assign clk_out = cnt_div[WIDTH-1];
endmodule"#,
    "\n"
);

/// `sample` surrounded by comments that mention `module`, `function` and
/// their end keywords.
pub fn with_decoy_comments(sample: &str) -> String {
    format!(
        "// module decoy_a (input x); endmodule\n/* function int decoy_b(int y);\n   return y; endfunction */\n{sample}// trailing module mention: module z; endmodule\n/* module */\n"
    )
}
